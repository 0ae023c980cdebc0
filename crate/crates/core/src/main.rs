fn main() {
    std::process::exit(saccade_hopfield::cli::main_with_args(std::env::args_os()));
}

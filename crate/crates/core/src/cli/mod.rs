//! The `saccade` command-line front end.
//!
//! Exit codes: 0 on success, 1 on input or validation errors, 2 when the
//! saccade loop hits its cap or template generation runs out of attempts.

pub mod config_file;
pub mod grid_file;
pub mod render;
pub mod report;

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use crate::error::{Error, Result};
use crate::model::{GazeState, Image};
use crate::recognition::{generate_templates, run_benchmark};
use crate::saccade::run_saccades;

use config_file::read_config;
use grid_file::{read_grid, read_template_dir, read_text, template_file_name, write_grid, write_text};
use report::{is_run_report, parse_gaze, parse_run_report, write_benchmark_report, write_run_report, RunReport};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_NOT_TERMINATED: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "saccade", version, about = "Hopfield network that locates and identifies patterns by saccades")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the saccade loop on one image and write a report with renderings.
    Run {
        #[arg(long)]
        image: PathBuf,
        /// Directory of *.grid templates, loaded in file-name order.
        #[arg(long)]
        templates: PathBuf,
        #[arg(long)]
        config: PathBuf,
        /// Initial gaze as "l,m" (row,column); defaults to the image center.
        #[arg(long, value_parser = gaze_arg)]
        gaze: Option<GazeState>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the 16-variants-per-class shift/deformation benchmark.
    Benchmark {
        #[arg(long)]
        templates: PathBuf,
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Field size "rows,cols"; defaults to the template plus the S-block half-width on each side.
        #[arg(long, value_parser = field_arg)]
        field: Option<(usize, usize)>,
    },
    /// Render a run report or a single GRID file.
    Render {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, value_enum)]
        format: Format,
        /// Output file; for a report rendered as PGM, a directory.
        #[arg(long)]
        out: PathBuf,
    },
    /// Generate random binary templates with a minimum pairwise Hamming distance.
    GenTemplates {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        rows: usize,
        #[arg(long)]
        cols: usize,
        #[arg(long = "min-sep")]
        min_sep: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Ascii,
    Pgm,
}

fn gaze_arg(s: &str) -> std::result::Result<GazeState, String> {
    parse_gaze(s).ok_or_else(|| format!("expected l,m, got {s:?}"))
}

fn field_arg(s: &str) -> std::result::Result<(usize, usize), String> {
    let err = || format!("expected rows,cols, got {s:?}");
    let (a, b) = s.split_once(',').ok_or_else(err)?;
    Ok((a.trim().parse().map_err(|_| err())?, b.trim().parse().map_err(|_| err())?))
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|source| Error::Io {
        path: dir.to_path_buf(),
        source,
    })
}

fn exit_code(err: &Error) -> i32 {
    match err {
        Error::GenerationFailed(_) => EXIT_NOT_TERMINATED,
        _ => EXIT_INPUT,
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => execute(cli),
        Err(e) => {
            let _ = e.print();
            if e.use_stderr() {
                EXIT_INPUT
            } else {
                EXIT_OK
            }
        }
    }
}

pub fn execute(cli: Cli) -> i32 {
    let outcome = match cli.command {
        Command::Run {
            image,
            templates,
            config,
            gaze,
            out,
        } => cmd_run(&image, &templates, &config, gaze, &out),
        Command::Benchmark {
            templates,
            config,
            out,
            field,
        } => cmd_benchmark(&templates, &config, &out, field),
        Command::Render { input, format, out } => cmd_render(&input, format, &out),
        Command::GenTemplates {
            n,
            rows,
            cols,
            min_sep,
            seed,
            out,
        } => cmd_gen_templates(n, rows, cols, min_sep, seed, &out),
    };
    match outcome {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            exit_code(&err)
        }
    }
}

pub fn cmd_run(
    image_path: &Path,
    templates_dir: &Path,
    config_path: &Path,
    gaze: Option<GazeState>,
    out_dir: &Path,
) -> Result<i32> {
    let config = read_config(config_path)?;
    let templates = read_template_dir(templates_dir)?;
    config.check_templates(&templates)?;
    let image = Image::new(read_grid(image_path)?)?;
    let gaze = gaze.unwrap_or(GazeState::new(image.rows() as i64 / 2, image.cols() as i64 / 2));

    let result = run_saccades(&image, &templates, gaze, &config)?;
    let report = RunReport::from_result(&config, &image, gaze, &result);

    create_dir(out_dir)?;
    write_text(&out_dir.join("report.txt"), write_run_report(&report))?;
    write_text(&out_dir.join("render.txt"), render::ascii_report(&report))?;
    render::write_report_pgms(out_dir, &report)?;

    println!(
        "class {} after {} hop(s), final gaze {}, {}",
        result.class_index,
        result.trace.len(),
        result.final_gaze,
        if result.terminated_naturally {
            "fixated"
        } else {
            "saccade cap reached"
        }
    );
    Ok(if result.terminated_naturally {
        EXIT_OK
    } else {
        EXIT_NOT_TERMINATED
    })
}

pub fn cmd_benchmark(
    templates_dir: &Path,
    config_path: &Path,
    out_path: &Path,
    field: Option<(usize, usize)>,
) -> Result<i32> {
    let config = read_config(config_path)?;
    let templates = read_template_dir(templates_dir)?;
    config.check_templates(&templates)?;
    let (hr, hc) = config.s_center();
    let field = field.unwrap_or((templates.rows() + 2 * hr, templates.cols() + 2 * hc));
    let report = run_benchmark(&templates, &config, field)?;
    write_text(out_path, write_benchmark_report(&config, field, &report))?;
    println!("accuracy {:.6} ({}/{})", report.accuracy, report.correct, report.total);
    Ok(EXIT_OK)
}

pub fn cmd_render(input: &Path, format: Format, out: &Path) -> Result<i32> {
    let text = read_text(input)?;
    if is_run_report(&text) {
        let report = parse_run_report(input, &text)?;
        match format {
            Format::Ascii => write_text(out, render::ascii_report(&report))?,
            Format::Pgm => {
                create_dir(out)?;
                render::write_report_pgms(out, &report)?;
            }
        }
    } else {
        let grid = grid_file::parse_grid(input, &text)?;
        match format {
            Format::Ascii => write_text(out, render::ascii_grid(&grid))?,
            Format::Pgm => render::write_pgm(out, &grid)?,
        }
    }
    Ok(EXIT_OK)
}

pub fn cmd_gen_templates(n: usize, rows: usize, cols: usize, min_sep: usize, seed: u64, out_dir: &Path) -> Result<i32> {
    let templates = generate_templates(n, rows, cols, min_sep, seed)?;
    create_dir(out_dir)?;
    for (k, t) in templates.iter().enumerate() {
        write_text(&out_dir.join(template_file_name(k)), write_grid(t))?;
    }
    println!("pairwise Hamming distances");
    for row in templates.pairwise_hamming() {
        let cells: Vec<String> = row.iter().map(|d| format!("{d:4}")).collect();
        println!("{}", cells.join(""));
    }
    Ok(EXIT_OK)
}

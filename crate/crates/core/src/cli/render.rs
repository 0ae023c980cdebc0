//! Text and PGM renderings of block outputs and run reports.

use std::path::Path;

use super::grid_file::write_text;
use super::report::{HopRecord, RunReport};
use crate::error::Result;
use crate::model::{GazeState, Grid};

/// Output levels from 0 to 1, darkest first.
pub const RAMP: &[u8; 10] = b" .:-=+*#%@";

pub fn level_char(v: f64) -> char {
    let k = (v.clamp(0.0, 1.0) * 9.0).round_ties_even() as usize;
    RAMP[k] as char
}

pub fn ascii_grid(grid: &Grid) -> String {
    let mut out = String::with_capacity(grid.len() + grid.rows());
    for r in 0..grid.rows() {
        out.extend((0..grid.cols()).map(|c| level_char(grid.get(r, c))));
        out.push('\n');
    }
    out
}

/// Image panel with the gaze cell drawn as `O`.
pub fn ascii_image(image: &Grid, gaze: GazeState) -> String {
    let mut out = String::new();
    for r in 0..image.rows() {
        for c in 0..image.cols() {
            if (r as i64, c as i64) == (gaze.l, gaze.m) {
                out.push('O');
            } else {
                out.push(level_char(image.get(r, c)));
            }
        }
        out.push('\n');
    }
    out
}

fn ascii_hop(report: &RunReport, k: usize, hop: &HopRecord) -> String {
    let (cx, cy) = report.config.s_center();
    let dx = hop.s_winner.0 as i64 - cx as i64;
    let dy = hop.s_winner.1 as i64 - cy as i64;
    let mut out = format!(
        "hop {k}: gaze ({}) class {} energy {:.6} steps {} {}\n",
        hop.gaze,
        hop.o_winner,
        hop.final_energy,
        hop.steps,
        if hop.converged { "converged" } else { "not converged" }
    );
    out.push_str("W (O = gaze)\n");
    out.push_str(&ascii_image(&report.image, hop.gaze));
    out.push_str("S\n");
    out.push_str(&ascii_grid(&hop.s));
    out.push_str(&format!(
        "S-winner ({},{}) -> delta ({dx},{dy})\n",
        hop.s_winner.0, hop.s_winner.1
    ));
    out.push_str("H\n");
    out.push_str(&ascii_grid(&hop.h));
    out.push_str("O\n");
    out.push_str(&ascii_grid(&hop.o));
    out
}

pub fn ascii_report(report: &RunReport) -> String {
    let mut out = String::new();
    for (k, hop) in report.hops.iter().enumerate() {
        out.push_str(&ascii_hop(report, k, hop));
        out.push('\n');
    }
    out.push_str(&format!(
        "class {} final gaze ({}) {}\n",
        report.class_index,
        report.final_gaze,
        if report.terminated_naturally {
            "fixated"
        } else {
            "saccade cap reached"
        }
    ));
    out
}

/// Binary P5 graymap, levels scaled to 0..=255.
pub fn pgm_bytes(grid: &Grid) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", grid.cols(), grid.rows()).into_bytes();
    out.extend(
        grid.as_slice()
            .iter()
            .map(|v| (v.clamp(0.0, 1.0) * 255.0).round() as u8),
    );
    out
}

pub fn write_pgm(path: &Path, grid: &Grid) -> Result<()> {
    write_text(path, pgm_bytes(grid))
}

/// Writes `image.pgm` plus `hop_KK_{s,h,o}.pgm` for each hop into `dir`.
pub fn write_report_pgms(dir: &Path, report: &RunReport) -> Result<Vec<std::path::PathBuf>> {
    let mut written = Vec::new();
    let image = dir.join("image.pgm");
    write_pgm(&image, &report.image)?;
    written.push(image);
    for (k, hop) in report.hops.iter().enumerate() {
        for (name, grid) in [("s", &hop.s), ("h", &hop.h), ("o", &hop.o)] {
            let path = dir.join(format!("hop_{k:02}_{name}.pgm"));
            write_pgm(&path, grid)?;
            written.push(path);
        }
    }
    Ok(written)
}

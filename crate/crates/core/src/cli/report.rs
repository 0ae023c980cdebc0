//! Run and benchmark report files.
//!
//! A run report is a sequence of `[section]` blocks. Key-value sections hold
//! `key=value` lines; grid sections hold one GRID body.
//!
//! ```text
//! SACCADE-REPORT 1
//! [config]        network configuration, same keys as the config file
//! [run]           initial_gaze, final_gaze, class_index, terminated_naturally, hops
//! [image]         GRID of the input image
//! [hop K]         gaze, s_winner, o_winner, final_energy, steps, converged
//! [hop K S]       GRID of S outputs (likewise H and O)
//! ```

use std::path::Path;

use super::config_file::{parse_config, write_config};
use super::grid_file::{parse_grid_lines, write_grid};
use crate::error::{Error, Result};
use crate::model::{GazeState, Grid, Image, NetworkConfig};
use crate::recognition::BenchmarkReport;
use crate::saccade::SaccadeResult;

pub const REPORT_MAGIC: &str = "SACCADE-REPORT 1";

#[derive(Debug, Clone, PartialEq)]
pub struct HopRecord {
    pub gaze: GazeState,
    pub s_winner: (usize, usize),
    pub o_winner: usize,
    pub final_energy: f64,
    pub steps: usize,
    pub converged: bool,
    pub s: Grid,
    pub h: Grid,
    pub o: Grid,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub config: NetworkConfig,
    pub initial_gaze: GazeState,
    pub final_gaze: GazeState,
    pub class_index: usize,
    pub terminated_naturally: bool,
    pub image: Grid,
    pub hops: Vec<HopRecord>,
}

impl RunReport {
    pub fn from_result(config: &NetworkConfig, image: &Image, initial_gaze: GazeState, result: &SaccadeResult) -> Self {
        let hops = result
            .trace
            .hops
            .iter()
            .map(|h| HopRecord {
                gaze: h.gaze_before,
                s_winner: h.s_winner,
                o_winner: h.o_winner,
                final_energy: h.final_energy,
                steps: h.steps,
                converged: h.converged,
                s: h.state.s.v().clone(),
                h: h.state.h.v().clone(),
                o: h.state.o.v().clone(),
            })
            .collect();
        Self {
            config: config.clone(),
            initial_gaze,
            final_gaze: result.final_gaze,
            class_index: result.class_index,
            terminated_naturally: result.terminated_naturally,
            image: image.pixels().clone(),
            hops,
        }
    }
}

// Full-precision, round-trippable float text.
fn float(v: f64) -> String {
    format!("{v:?}")
}

fn full_grid(grid: &Grid) -> String {
    let mut out = format!("GRID {} {}\n", grid.rows(), grid.cols());
    for r in 0..grid.rows() {
        let row: Vec<String> = (0..grid.cols()).map(|c| float(grid.get(r, c))).collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}

pub fn write_run_report(report: &RunReport) -> String {
    let mut out = format!("{REPORT_MAGIC}\n[config]\n");
    out.push_str(&write_config(&report.config));
    out.push_str("[run]\n");
    out.push_str(&format!("initial_gaze={}\n", report.initial_gaze));
    out.push_str(&format!("final_gaze={}\n", report.final_gaze));
    out.push_str(&format!("class_index={}\n", report.class_index));
    out.push_str(&format!("terminated_naturally={}\n", report.terminated_naturally));
    out.push_str(&format!("hops={}\n", report.hops.len()));
    out.push_str("[image]\n");
    out.push_str(&write_grid(&report.image));
    for (k, hop) in report.hops.iter().enumerate() {
        out.push_str(&format!("[hop {k}]\n"));
        out.push_str(&format!("gaze={}\n", hop.gaze));
        out.push_str(&format!("s_winner={},{}\n", hop.s_winner.0, hop.s_winner.1));
        out.push_str(&format!("o_winner={}\n", hop.o_winner));
        out.push_str(&format!("final_energy={}\n", float(hop.final_energy)));
        out.push_str(&format!("steps={}\n", hop.steps));
        out.push_str(&format!("converged={}\n", hop.converged));
        for (name, grid) in [("S", &hop.s), ("H", &hop.h), ("O", &hop.o)] {
            out.push_str(&format!("[hop {k} {name}]\n"));
            out.push_str(&full_grid(grid));
        }
    }
    out
}

struct Section<'a> {
    name: &'a str,
    /// 1-based line number of the `[name]` header.
    line: usize,
    body: Vec<&'a str>,
}

fn split_sections<'a>(path: &Path, text: &'a str) -> Result<Vec<Section<'a>>> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, first)) if first.trim() == REPORT_MAGIC => {}
        _ => {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line: 1,
                message: format!("expected {REPORT_MAGIC:?} header"),
            })
        }
    }
    let mut sections: Vec<Section<'a>> = Vec::new();
    for (k, line) in lines {
        let trimmed = line.trim();
        if let Some(name) = trimmed.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
            sections.push(Section {
                name,
                line: k + 1,
                body: Vec::new(),
            });
        } else if let Some(section) = sections.last_mut() {
            section.body.push(line);
        } else if !trimmed.is_empty() {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line: k + 1,
                message: "content before the first section".into(),
            });
        }
    }
    Ok(sections)
}

struct KeyValues<'a> {
    path: &'a Path,
    line: usize,
    pairs: Vec<(usize, &'a str, &'a str)>,
}

impl<'a> KeyValues<'a> {
    fn new(path: &'a Path, section: &Section<'a>) -> Result<Self> {
        let mut pairs = Vec::new();
        for (k, line) in section.body.iter().enumerate() {
            let line_no = section.line + 1 + k;
            if line.trim().is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
                path: path.to_path_buf(),
                line: line_no,
                message: format!("expected key=value, got {line:?}"),
            })?;
            pairs.push((line_no, key.trim(), value.trim()));
        }
        Ok(Self {
            path,
            line: section.line,
            pairs,
        })
    }

    fn get<T>(&self, key: &str, parse: impl Fn(&str) -> Option<T>) -> Result<T> {
        let (line, _, value) = self
            .pairs
            .iter()
            .find(|(_, k, _)| *k == key)
            .ok_or_else(|| Error::Parse {
                path: self.path.to_path_buf(),
                line: self.line,
                message: format!("missing key {key:?}"),
            })?;
        parse(value).ok_or_else(|| Error::Parse {
            path: self.path.to_path_buf(),
            line: *line,
            message: format!("bad value for {key}: {value:?}"),
        })
    }
}

fn pair<T: std::str::FromStr>(s: &str) -> Option<(T, T)> {
    let (a, b) = s.split_once(',')?;
    Some((a.trim().parse().ok()?, b.trim().parse().ok()?))
}

pub fn parse_gaze(s: &str) -> Option<GazeState> {
    pair::<i64>(s).map(|(l, m)| GazeState::new(l, m))
}

pub fn parse_run_report(path: &Path, text: &str) -> Result<RunReport> {
    let sections = split_sections(path, text)?;
    let find = |name: &str| {
        sections.iter().find(|s| s.name == name).ok_or_else(|| Error::Parse {
            path: path.to_path_buf(),
            line: 1,
            message: format!("missing [{name}] section"),
        })
    };
    let grid_of = |name: &str| -> Result<Grid> {
        let section = find(name)?;
        parse_grid_lines(path, section.line + 1, &mut section.body.iter().copied())
    };

    let config_section = find("config")?;
    let config_text = config_section.body.join("\n");
    let config = parse_config(path, &config_text).map_err(|e| match e {
        Error::Parse { path, line, message } => Error::Parse {
            path,
            line: config_section.line + line,
            message,
        },
        other => other,
    })?;

    let run = KeyValues::new(path, find("run")?)?;
    let initial_gaze = run.get("initial_gaze", parse_gaze)?;
    let final_gaze = run.get("final_gaze", parse_gaze)?;
    let class_index = run.get("class_index", |s| s.parse().ok())?;
    let terminated_naturally = run.get("terminated_naturally", |s| s.parse().ok())?;
    let hop_count: usize = run.get("hops", |s| s.parse().ok())?;
    let image = grid_of("image")?;

    let mut hops = Vec::with_capacity(hop_count);
    for k in 0..hop_count {
        let kv = KeyValues::new(path, find(&format!("hop {k}"))?)?;
        hops.push(HopRecord {
            gaze: kv.get("gaze", parse_gaze)?,
            s_winner: kv.get("s_winner", pair::<usize>)?,
            o_winner: kv.get("o_winner", |s| s.parse().ok())?,
            final_energy: kv.get("final_energy", |s| s.parse().ok())?,
            steps: kv.get("steps", |s| s.parse().ok())?,
            converged: kv.get("converged", |s| s.parse().ok())?,
            s: grid_of(&format!("hop {k} S"))?,
            h: grid_of(&format!("hop {k} H"))?,
            o: grid_of(&format!("hop {k} O"))?,
        });
    }
    Ok(RunReport {
        config,
        initial_gaze,
        final_gaze,
        class_index,
        terminated_naturally,
        image,
        hops,
    })
}

pub fn is_run_report(text: &str) -> bool {
    text.lines().next().is_some_and(|l| l.trim() == REPORT_MAGIC)
}

/// Benchmark summary, confusion matrix and per-variant table as text.
pub fn write_benchmark_report(config: &NetworkConfig, field: (usize, usize), report: &BenchmarkReport) -> String {
    let mut out = String::from("SACCADE-BENCHMARK 1\n[config]\n");
    out.push_str(&write_config(config));
    out.push_str("[summary]\n");
    out.push_str(&format!("field={},{}\n", field.0, field.1));
    out.push_str(&format!("total={}\n", report.total));
    out.push_str(&format!("correct={}\n", report.correct));
    out.push_str(&format!("accuracy={:.6}\n", report.accuracy));
    out.push_str("[confusion]\n# rows: true class, columns: predicted class\n");
    for row in &report.confusion {
        let cells: Vec<String> = row.iter().map(ToString::to_string).collect();
        out.push_str(&cells.join(" "));
        out.push('\n');
    }
    out.push_str("[unresolved]\n");
    let cells: Vec<String> = report.unresolved.iter().map(ToString::to_string).collect();
    out.push_str(&cells.join(" "));
    out.push('\n');
    out.push_str("[variants]\n# index class shift flips seed predicted hops terminated_naturally\n");
    for (k, v) in report.per_variant.iter().enumerate() {
        out.push_str(&format!(
            "{k} {} {},{} {} {} {} {} {}\n",
            v.spec.class_index,
            v.spec.shift.0,
            v.spec.shift.1,
            v.spec.flips,
            v.spec.seed,
            v.predicted,
            v.hops,
            v.terminated_naturally
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_report() -> RunReport {
        let config = NetworkConfig::shift_invariant();
        let hop = |k: usize| HopRecord {
            gaze: GazeState::new(9 - k as i64, -2),
            s_winner: (k, 1),
            o_winner: 7,
            final_energy: 0.1 + 1.0 / 3.0,
            steps: 2600 + k,
            converged: k == 1,
            s: Grid::from_fn(3, 3, |r, c| 1.0 / (2.0 + (r * 3 + c) as f64)),
            h: Grid::from_fn(16, 16, |r, c| ((r + c) % 3) as f64 / 7.0),
            o: Grid::from_fn(1, 10, |_, c| c as f64 / 10.0),
        };
        RunReport {
            config,
            initial_gaze: GazeState::new(9, 9),
            final_gaze: GazeState::new(8, 8),
            class_index: 7,
            terminated_naturally: true,
            image: Grid::from_fn(18, 18, |r, c| ((r * c) % 2) as f64),
            hops: vec![hop(0), hop(1)],
        }
    }

    #[test]
    fn run_report_round_trips() {
        let report = sample_report();
        let text = write_run_report(&report);
        assert!(is_run_report(&text));
        let parsed = parse_run_report(Path::new("r.txt"), &text).unwrap();
        assert_eq!(parsed, report);
        assert_eq!(write_run_report(&parsed), text);
    }

    #[test]
    fn truncated_report_fails_with_location() {
        let text = write_run_report(&sample_report());
        let cut: String = text.lines().take(40).map(|l| format!("{l}\n")).collect();
        assert!(parse_run_report(Path::new("r.txt"), &cut).is_err());
        let broken = text.replace("o_winner=7", "o_winner=seven");
        let err = parse_run_report(Path::new("r.txt"), &broken).unwrap_err();
        assert!(matches!(err, Error::Parse { line, .. } if line > 1), "{err}");
        assert!(parse_run_report(Path::new("r.txt"), "GRID 1 1\n0\n").is_err());
    }
}

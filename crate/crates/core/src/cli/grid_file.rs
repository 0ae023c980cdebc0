//! `GRID <rows> <cols>` text grids, used for images and templates.

use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::model::{Grid, TemplateSet};

pub fn format_value(v: f64) -> String {
    if v == 0.0 {
        "0".to_string()
    } else if v == 1.0 {
        "1".to_string()
    } else {
        v.to_string()
    }
}

pub fn write_grid(grid: &Grid) -> String {
    let mut out = format!("GRID {} {}\n", grid.rows(), grid.cols());
    for r in 0..grid.rows() {
        let row: Vec<String> = (0..grid.cols()).map(|c| format_value(grid.get(r, c))).collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}

/// Parses a grid from `lines`, whose first item must be the header.
/// `first_line` is the 1-based file line of that header, for diagnostics.
pub(crate) fn parse_grid_lines<'a>(
    path: &Path,
    first_line: usize,
    lines: &mut impl Iterator<Item = &'a str>,
) -> Result<Grid> {
    let err = |line: usize, message: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };
    let header = lines
        .next()
        .ok_or_else(|| err(first_line, "missing GRID header".into()))?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    let (rows, cols) = match fields.as_slice() {
        ["GRID", r, c] => {
            let r: usize = r
                .parse()
                .map_err(|_| err(first_line, format!("bad row count {r:?}")))?;
            let c: usize = c
                .parse()
                .map_err(|_| err(first_line, format!("bad column count {c:?}")))?;
            (r, c)
        }
        _ => return Err(err(first_line, format!("expected \"GRID <rows> <cols>\", got {header:?}"))),
    };
    if rows == 0 || cols == 0 {
        return Err(err(first_line, "grid dimensions must be >= 1".into()));
    }
    let mut data = Vec::with_capacity(rows * cols);
    for r in 0..rows {
        let line_no = first_line + 1 + r;
        let line = lines
            .next()
            .ok_or_else(|| err(line_no, format!("expected {rows} rows, found {r}")))?;
        let before = data.len();
        for token in line.split_whitespace() {
            let v: f64 = token
                .parse()
                .map_err(|_| err(line_no, format!("not a number: {token:?}")))?;
            if !(0.0..=1.0).contains(&v) {
                return Err(err(line_no, format!("value {v} outside [0, 1]")));
            }
            data.push(v);
        }
        if data.len() - before != cols {
            return Err(err(
                line_no,
                format!("expected {cols} values, found {}", data.len() - before),
            ));
        }
    }
    Grid::from_vec(rows, cols, data)
}

pub fn parse_grid(path: &Path, text: &str) -> Result<Grid> {
    let mut lines = text.lines();
    let grid = parse_grid_lines(path, 1, &mut lines)?;
    for (k, rest) in lines.enumerate() {
        if !rest.trim().is_empty() {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line: grid.rows() + 2 + k,
                message: "unexpected content after the grid body".into(),
            });
        }
    }
    Ok(grid)
}

pub(crate) fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub(crate) fn write_text(path: &Path, text: impl AsRef<[u8]>) -> Result<()> {
    fs::write(path, text).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn read_grid(path: &Path) -> Result<Grid> {
    parse_grid(path, &read_text(path)?)
}

/// Loads every `*.grid` file in `dir`, sorted by file name.
pub fn read_template_dir(dir: &Path) -> Result<TemplateSet> {
    let io = |source| Error::Io {
        path: dir.to_path_buf(),
        source,
    };
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(io)?
        .map(|entry| entry.map(|e| e.path()))
        .collect::<std::io::Result<_>>()
        .map_err(io)?;
    paths.retain(|p| p.extension().is_some_and(|e| e == "grid"));
    paths.sort();
    if paths.is_empty() {
        return Err(Error::InvalidInput(format!(
            "{}: no .grid templates found",
            dir.display()
        )));
    }
    let grids = paths.iter().map(|p| read_grid(p)).collect::<Result<Vec<_>>>()?;
    TemplateSet::new(grids)
}

pub fn template_file_name(index: usize) -> String {
    format!("template_{index:02}.grid")
}

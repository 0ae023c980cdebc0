//! Flat `key=value` network configuration, one pair per line, `#` comments.
//!
//! The penalty weights and block dimensions (`c0..c3`, `X Y I J N`) are
//! required; relaxation parameters fall back to
//! [`NetworkConfig::dynamics_defaults`].

use std::collections::HashSet;
use std::path::Path;

use crate::error::{Error, Result};
use crate::model::NetworkConfig;

const REQUIRED: [&str; 9] = ["c0", "c1", "c2", "c3", "X", "Y", "I", "J", "N"];

pub fn parse_config(path: &Path, text: &str) -> Result<NetworkConfig> {
    let mut cfg = NetworkConfig::dynamics_defaults();
    let mut seen = HashSet::new();
    for (k, raw) in text.lines().enumerate() {
        let line_no = k + 1;
        let err = |message: String| Error::Parse {
            path: path.to_path_buf(),
            line: line_no,
            message,
        };
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| err(format!("expected key=value, got {line:?}")))?;
        let (key, value) = (key.trim(), value.trim());
        if !seen.insert(key.to_string()) {
            return Err(err(format!("duplicate key {key:?}")));
        }
        let real = || -> Result<f64> {
            value
                .parse()
                .map_err(|_| err(format!("{key}: not a number: {value:?}")))
        };
        let count = || -> Result<usize> {
            value
                .parse()
                .map_err(|_| err(format!("{key}: not a non-negative integer: {value:?}")))
        };
        match key {
            "c0" => cfg.c0 = real()?,
            "c1" => cfg.c1 = real()?,
            "c2" => cfg.c2 = real()?,
            "c3" => cfg.c3 = real()?,
            "X" => cfg.s_rows = count()?,
            "Y" => cfg.s_cols = count()?,
            "I" => cfg.h_rows = count()?,
            "J" => cfg.h_cols = count()?,
            "N" => cfg.classes = count()?,
            "dt" => cfg.dt = real()?,
            "max_steps" => cfg.max_steps = count()?,
            "conv_eps" => cfg.conv_eps = real()?,
            "max_saccades" => cfg.max_saccades = count()?,
            "seed" => {
                cfg.seed = value
                    .parse()
                    .map_err(|_| err(format!("seed: not an unsigned integer: {value:?}")))?
            }
            "init_noise" => cfg.init_noise = real()?,
            other => return Err(err(format!("unknown key {other:?}"))),
        }
    }
    let missing: Vec<&str> = REQUIRED.iter().copied().filter(|k| !seen.contains(*k)).collect();
    if !missing.is_empty() {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            line: text.lines().count(),
            message: format!("missing required keys: {}", missing.join(", ")),
        });
    }
    cfg.validate()?;
    Ok(cfg)
}

pub fn write_config(cfg: &NetworkConfig) -> String {
    let pairs: [(&str, String); 15] = [
        ("c0", cfg.c0.to_string()),
        ("c1", cfg.c1.to_string()),
        ("c2", cfg.c2.to_string()),
        ("c3", cfg.c3.to_string()),
        ("X", cfg.s_rows.to_string()),
        ("Y", cfg.s_cols.to_string()),
        ("I", cfg.h_rows.to_string()),
        ("J", cfg.h_cols.to_string()),
        ("N", cfg.classes.to_string()),
        ("dt", cfg.dt.to_string()),
        ("max_steps", cfg.max_steps.to_string()),
        ("conv_eps", cfg.conv_eps.to_string()),
        ("max_saccades", cfg.max_saccades.to_string()),
        ("seed", cfg.seed.to_string()),
        ("init_noise", cfg.init_noise.to_string()),
    ];
    pairs.iter().map(|(k, v)| format!("{k}={v}\n")).collect()
}

pub fn read_config(path: &Path) -> Result<NetworkConfig> {
    parse_config(path, &super::grid_file::read_text(path)?)
}

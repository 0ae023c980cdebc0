//! Shift-invariant recognition benchmark: shifted and deformed variants of
//! each template are presented off-center, and the saccade loop has to find
//! and name them.

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{GazeState, Grid, Image, NetworkConfig, NetworkState, TemplateSet};
use crate::saccade::run_saccades;

/// Largest deformation the benchmark applies.
pub const MAX_FLIPS: usize = 8;

/// The eight one-pixel shift directions, row-major around the center.
pub const SHIFTS: [(i64, i64); 8] = [
    (-1, -1),
    (-1, 0),
    (-1, 1),
    (0, -1),
    (0, 1),
    (1, -1),
    (1, 0),
    (1, 1),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VariantSpec {
    pub class_index: usize,
    pub shift: (i64, i64),
    /// Number of distinct template pixels inverted.
    pub flips: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VariantOutcome {
    pub spec: VariantSpec,
    pub predicted: usize,
    pub hops: usize,
    pub terminated_naturally: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkReport {
    pub total: usize,
    /// Naturally terminated runs that named the right class.
    pub correct: usize,
    pub accuracy: f64,
    /// `confusion[true][predicted]` over naturally terminated runs.
    pub confusion: Vec<Vec<usize>>,
    /// Per true class, runs that hit the saccade cap. They count as errors.
    pub unresolved: Vec<usize>,
    pub per_variant: Vec<VariantOutcome>,
}

/// Top-left corner of a template centered in `field`.
pub fn centered_origin(templates: &TemplateSet, field: (usize, usize)) -> (i64, i64) {
    (
        (field.0 as i64 - templates.rows() as i64).div_euclid(2),
        (field.1 as i64 - templates.cols() as i64).div_euclid(2),
    )
}

/// Gaze at which a centered, unshifted template is already fixated.
pub fn field_center_gaze(templates: &TemplateSet, field: (usize, usize), config: &NetworkConfig) -> GazeState {
    let (top, left) = centered_origin(templates, field);
    let (dr, dc) = config.fixated_patch_offset();
    GazeState::new(top - dr, left - dc)
}

pub fn make_variant(templates: &TemplateSet, spec: &VariantSpec, field: (usize, usize)) -> Result<Image> {
    if spec.class_index >= templates.len() {
        return Err(Error::InvalidInput(format!(
            "class {} out of range for {} templates",
            spec.class_index,
            templates.len()
        )));
    }
    let (rows, cols) = (templates.rows(), templates.cols());
    if spec.flips > rows * cols {
        return Err(Error::InvalidInput(format!(
            "{} flips exceed the {rows}x{cols} template",
            spec.flips
        )));
    }
    let (top, left) = centered_origin(templates, field);
    let (top, left) = (top + spec.shift.0, left + spec.shift.1);
    if top < 0 || left < 0 || top as usize + rows > field.0 || left as usize + cols > field.1 {
        return Err(Error::InvalidInput(format!(
            "{rows}x{cols} template shifted by {:?} does not fit a {}x{} field",
            spec.shift, field.0, field.1
        )));
    }
    let mut patch = templates.get(spec.class_index).clone();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    for k in index::sample(&mut rng, rows * cols, spec.flips) {
        let v = &mut patch.as_mut_slice()[k];
        *v = 1.0 - *v;
    }
    let mut pixels = Grid::zeros(field.0, field.1);
    for i in 0..rows {
        for j in 0..cols {
            pixels.set(top as usize + i, left as usize + j, patch.get(i, j));
        }
    }
    Image::new(pixels)
}

/// Sixteen variants per class: every one-pixel shift, undeformed and with
/// [`MAX_FLIPS`] flips.
pub fn generate_suite(templates: &TemplateSet, config: &NetworkConfig) -> Vec<VariantSpec> {
    let mut specs = Vec::with_capacity(templates.len() * SHIFTS.len() * 2);
    for class_index in 0..templates.len() {
        for &shift in &SHIFTS {
            for flips in [0, MAX_FLIPS] {
                let seed = config.seed.wrapping_add(specs.len() as u64);
                specs.push(VariantSpec {
                    class_index,
                    shift,
                    flips,
                    seed,
                });
            }
        }
    }
    specs
}

pub fn run_benchmark(templates: &TemplateSet, config: &NetworkConfig, field: (usize, usize)) -> Result<BenchmarkReport> {
    run_suite(templates, config, field, &generate_suite(templates, config))
}

/// Runs the saccade loop on each spec, fanning out across threads; outcomes
/// stay in spec order.
pub fn run_suite(
    templates: &TemplateSet,
    config: &NetworkConfig,
    field: (usize, usize),
    specs: &[VariantSpec],
) -> Result<BenchmarkReport> {
    config.validate()?;
    config.check_templates(templates)?;
    let gaze = field_center_gaze(templates, field, config);
    let per_variant = specs
        .par_iter()
        .map(|spec| {
            let image = make_variant(templates, spec, field)?;
            let result = run_saccades(&image, templates, gaze, config)?;
            Ok(VariantOutcome {
                spec: *spec,
                predicted: result.class_index,
                hops: result.trace.len(),
                terminated_naturally: result.terminated_naturally,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let n = templates.len();
    let mut confusion = vec![vec![0; n]; n];
    let mut unresolved = vec![0; n];
    for outcome in &per_variant {
        if outcome.terminated_naturally {
            confusion[outcome.spec.class_index][outcome.predicted] += 1;
        } else {
            unresolved[outcome.spec.class_index] += 1;
        }
    }
    let correct = (0..n).map(|k| confusion[k][k]).sum();
    let total = per_variant.len();
    Ok(BenchmarkReport {
        total,
        correct,
        accuracy: if total == 0 { 0.0 } else { correct as f64 / total as f64 },
        confusion,
        unresolved,
        per_variant,
    })
}

/// Pearson correlation between the H outputs and template `class_index`.
/// Zero when either side is constant.
pub fn h_block_similarity(state: &NetworkState, templates: &TemplateSet, class_index: usize) -> f64 {
    pearson(state.h.v().as_slice(), templates.get(class_index).as_slice())
}

fn pearson(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut cov, mut va, mut vb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        cov += (x - ma) * (y - mb);
        va += (x - ma) * (x - ma);
        vb += (y - mb) * (y - mb);
    }
    if va == 0.0 || vb == 0.0 {
        0.0
    } else {
        (cov / (va * vb).sqrt()).clamp(-1.0, 1.0)
    }
}

/// Draws per-template attempt budget for [`generate_templates`].
pub const GENERATION_ATTEMPTS: usize = 10_000;

/// Random binary templates with pairwise Hamming distance at least
/// `min_separation`, built by rejection sampling.
pub fn generate_templates(n: usize, rows: usize, cols: usize, min_separation: usize, seed: u64) -> Result<TemplateSet> {
    if n == 0 || rows == 0 || cols == 0 {
        return Err(Error::InvalidInput("template count and dimensions must be >= 1".into()));
    }
    if n > 1 && min_separation > rows * cols {
        return Err(Error::GenerationFailed(format!(
            "separation {min_separation} exceeds the {} pixels of a {rows}x{cols} template",
            rows * cols
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut accepted: Vec<Grid> = Vec::with_capacity(n);
    while accepted.len() < n {
        let mut found = None;
        for _ in 0..GENERATION_ATTEMPTS {
            let candidate = Grid::from_fn(rows, cols, |_, _| rng.gen_range(0..2) as f64);
            if accepted.iter().all(|t| t.hamming(&candidate) >= min_separation) {
                found = Some(candidate);
                break;
            }
        }
        match found {
            Some(t) => accepted.push(t),
            None => {
                return Err(Error::GenerationFailed(format!(
                    "no template {} of {n} at separation {min_separation} after {GENERATION_ATTEMPTS} attempts",
                    accepted.len() + 1
                )))
            }
        }
    }
    TemplateSet::new(accepted)
}

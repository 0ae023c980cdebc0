//! The four-term network energy and its gradient with respect to the
//! neuron outputs.
//!
//! ```text
//! E = C0 Σ_ij (Σ_xy Z[i+x, j+y] V^S[x,y] - V^H[i,j])²     image match
//!   + C1 Σ_ij (Σ_n T^n[i,j] V^O[n]      - V^H[i,j])²     template match
//!   + C2 (Σ_xy V^S[x,y] - 1)²                             S winner-take-all
//!   + C3 (Σ_n V^O[n] - 1)²                                O winner-take-all
//! ```

use crate::error::{Error, Result};
use crate::model::{sample_z, window_mask, GazeState, Grid, Image, NetworkConfig, NetworkState, TemplateSet};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyBreakdown {
    pub term_match: f64,
    pub term_template: f64,
    pub term_wta_s: f64,
    pub term_wta_o: f64,
    pub total: f64,
}

/// `∂E/∂V` for every neuron, shaped like the network blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradient {
    pub d_s: Grid,
    pub d_h: Grid,
    pub d_o: Vec<f64>,
}

/// Borrowed output vectors of the three blocks, row-major.
#[derive(Debug, Clone, Copy)]
pub struct Outputs<'a> {
    pub s: &'a [f64],
    pub h: &'a [f64],
    pub o: &'a [f64],
}

impl<'a> From<&'a NetworkState> for Outputs<'a> {
    fn from(state: &'a NetworkState) -> Self {
        Self {
            s: state.s.v().as_slice(),
            h: state.h.v().as_slice(),
            o: state.o.v().as_slice(),
        }
    }
}

/// The energy surface for one (image, templates, gaze) triple, with the
/// windowed image read tabulated once.
#[derive(Debug, Clone)]
pub struct Landscape<'a> {
    config: &'a NetworkConfig,
    templates: &'a TemplateSet,
    z: Grid,
}

impl<'a> Landscape<'a> {
    pub fn new(
        image: &Image,
        templates: &'a TemplateSet,
        gaze: GazeState,
        config: &'a NetworkConfig,
    ) -> Result<Self> {
        config.check_templates(templates)?;
        let (rows, cols) = config.window_shape();
        let z = Grid::from_fn(rows, cols, |i, j| sample_z(image, gaze, i as i64, j as i64, config));
        Ok(Self { config, templates, z })
    }

    pub fn config(&self) -> &NetworkConfig {
        self.config
    }

    fn check(&self, out: &Outputs<'_>) -> Result<()> {
        let c = self.config;
        let lens = [
            ("S block", out.s.len(), c.s_rows * c.s_cols),
            ("H block", out.h.len(), c.h_rows * c.h_cols),
            ("O block", out.o.len(), c.classes),
        ];
        for (what, actual, expected) in lens {
            if actual != expected {
                return Err(Error::ShapeMismatch {
                    what,
                    expected: (1, expected),
                    actual: (1, actual),
                });
            }
        }
        Ok(())
    }

    /// Residuals of the two matching terms, each `I x J` row-major.
    fn residuals(&self, out: &Outputs<'_>) -> (Vec<f64>, Vec<f64>) {
        let c = self.config;
        let (hr, hc, sr, sc) = (c.h_rows, c.h_cols, c.s_rows, c.s_cols);
        let zc = self.z.cols();
        let z = self.z.as_slice();
        let mut r1 = vec![0.0; hr * hc];
        let mut r2 = vec![0.0; hr * hc];
        for i in 0..hr {
            for j in 0..hc {
                let mut acc = 0.0;
                for x in 0..sr {
                    let zrow = &z[(i + x) * zc + j..(i + x) * zc + j + sc];
                    let srow = &out.s[x * sc..(x + 1) * sc];
                    acc += zrow.iter().zip(srow).map(|(a, b)| a * b).sum::<f64>();
                }
                let k = i * hc + j;
                r1[k] = acc - out.h[k];
            }
        }
        for (n, t) in self.templates.iter().enumerate() {
            let weight = out.o[n];
            for (r, tv) in r2.iter_mut().zip(t.as_slice()) {
                *r += tv * weight;
            }
        }
        for (r, h) in r2.iter_mut().zip(out.h) {
            *r -= h;
        }
        (r1, r2)
    }

    fn breakdown(&self, out: &Outputs<'_>, r1: &[f64], r2: &[f64]) -> EnergyBreakdown {
        let c = self.config;
        let ss = out.s.iter().sum::<f64>() - 1.0;
        let so = out.o.iter().sum::<f64>() - 1.0;
        let term_match = c.c0 * r1.iter().map(|r| r * r).sum::<f64>();
        let term_template = c.c1 * r2.iter().map(|r| r * r).sum::<f64>();
        let term_wta_s = c.c2 * ss * ss;
        let term_wta_o = c.c3 * so * so;
        EnergyBreakdown {
            term_match,
            term_template,
            term_wta_s,
            term_wta_o,
            total: term_match + term_template + term_wta_s + term_wta_o,
        }
    }

    pub fn energy(&self, out: Outputs<'_>) -> Result<EnergyBreakdown> {
        self.check(&out)?;
        let (r1, r2) = self.residuals(&out);
        Ok(self.breakdown(&out, &r1, &r2))
    }

    pub fn gradient(&self, out: Outputs<'_>) -> Result<Gradient> {
        self.evaluate(out).map(|(_, g)| g)
    }

    /// Energy and gradient from one pass over the residuals.
    pub fn evaluate(&self, out: Outputs<'_>) -> Result<(EnergyBreakdown, Gradient)> {
        self.check(&out)?;
        let c = self.config;
        let (r1, r2) = self.residuals(&out);
        let energy = self.breakdown(&out, &r1, &r2);

        let (hr, hc, sr, sc) = (c.h_rows, c.h_cols, c.s_rows, c.s_cols);
        let zc = self.z.cols();
        let z = self.z.as_slice();

        let wta_s = 2.0 * c.c2 * (out.s.iter().sum::<f64>() - 1.0);
        let d_s = Grid::from_fn(sr, sc, |x, y| {
            let mut acc = 0.0;
            for i in 0..hr {
                let zrow = &z[(i + x) * zc + y..(i + x) * zc + y + hc];
                let rrow = &r1[i * hc..(i + 1) * hc];
                acc += zrow.iter().zip(rrow).map(|(a, b)| a * b).sum::<f64>();
            }
            2.0 * c.c0 * acc + wta_s
        });

        let d_h = Grid::from_vec(
            hr,
            hc,
            r1.iter()
                .zip(&r2)
                .map(|(a, b)| -2.0 * c.c0 * a - 2.0 * c.c1 * b)
                .collect(),
        )?;

        let wta_o = 2.0 * c.c3 * (out.o.iter().sum::<f64>() - 1.0);
        let d_o = self
            .templates
            .iter()
            .map(|t| {
                let dot: f64 = t.as_slice().iter().zip(&r2).map(|(a, b)| a * b).sum();
                2.0 * c.c1 * dot + wta_o
            })
            .collect();

        Ok((energy, Gradient { d_s, d_h, d_o }))
    }
}

pub fn energy(
    state: &NetworkState,
    image: &Image,
    templates: &TemplateSet,
    gaze: GazeState,
    config: &NetworkConfig,
) -> Result<EnergyBreakdown> {
    state.check_shape(config)?;
    Landscape::new(image, templates, gaze, config)?.energy(state.into())
}

pub fn gradient(
    state: &NetworkState,
    image: &Image,
    templates: &TemplateSet,
    gaze: GazeState,
    config: &NetworkConfig,
) -> Result<Gradient> {
    state.check_shape(config)?;
    Landscape::new(image, templates, gaze, config)?.gradient(state.into())
}

/// Every residual of the energy, computed by direct nested loops.
///
/// Reads image pixels itself instead of going through [`sample_z`] or the
/// tabulated window, and recomputes every inner sum from scratch. Testing
/// support only.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleResiduals {
    pub image_match: Vec<f64>,
    pub template_match: Vec<f64>,
    pub s_excess: f64,
    pub o_excess: f64,
}

pub fn residual_oracle(
    out: Outputs<'_>,
    image: &Image,
    templates: &TemplateSet,
    gaze: GazeState,
    config: &NetworkConfig,
) -> OracleResiduals {
    let c = config;
    let (ir, ic) = (c.h_rows + c.s_rows, c.h_cols + c.s_cols);
    let (half_r, half_c) = ((ir / 2) as i64, (ic / 2) as i64);
    let pixel = |zi: usize, zj: usize| -> f64 {
        let row = gaze.l + zi as i64 - half_r;
        let col = gaze.m + zj as i64 - half_c;
        if row < 0 || col < 0 || row >= image.rows() as i64 || col >= image.cols() as i64 {
            0.0
        } else {
            image.pixels().get(row as usize, col as usize)
        }
    };

    let mut image_match = Vec::with_capacity(c.h_rows * c.h_cols);
    for i in 0..c.h_rows {
        for j in 0..c.h_cols {
            let mut sum = 0.0;
            for x in 0..c.s_rows {
                for y in 0..c.s_cols {
                    let mask = window_mask(i as i64, j as i64, c) as f64;
                    sum += mask * pixel(i + x, j + y) * out.s[x * c.s_cols + y];
                }
            }
            image_match.push(sum - out.h[i * c.h_cols + j]);
        }
    }

    let mut template_match = Vec::with_capacity(c.h_rows * c.h_cols);
    for i in 0..c.h_rows {
        for j in 0..c.h_cols {
            let mut sum = 0.0;
            for n in 0..c.classes {
                sum += templates.get(n).get(i, j) * out.o[n];
            }
            template_match.push(sum - out.h[i * c.h_cols + j]);
        }
    }

    let mut s_sum = 0.0;
    for x in 0..c.s_rows {
        for y in 0..c.s_cols {
            s_sum += out.s[x * c.s_cols + y];
        }
    }
    let mut o_sum = 0.0;
    for n in 0..c.classes {
        o_sum += out.o[n];
    }

    OracleResiduals {
        image_match,
        template_match,
        s_excess: s_sum - 1.0,
        o_excess: o_sum - 1.0,
    }
}

/// Energy from [`residual_oracle`].
pub fn energy_oracle(
    out: Outputs<'_>,
    image: &Image,
    templates: &TemplateSet,
    gaze: GazeState,
    config: &NetworkConfig,
) -> f64 {
    let r = residual_oracle(out, image, templates, gaze, config);
    let squares = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>();
    config.c0 * squares(&r.image_match)
        + config.c1 * squares(&r.template_match)
        + config.c2 * r.s_excess * r.s_excess
        + config.c3 * r.o_excess * r.o_excess
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Block {
    S,
    H,
    O,
}

/// Central difference `(E(v + step) - E(v - step)) / (2 step)` along one
/// output, from oracle residuals at both probes.
///
/// Each squared term is differenced as `(a - b)(a + b)` before summing, so
/// the result does not lose digits to the size of the total energy.
#[allow(clippy::too_many_arguments)]
pub fn central_difference_oracle(
    out: Outputs<'_>,
    image: &Image,
    templates: &TemplateSet,
    gaze: GazeState,
    config: &NetworkConfig,
    block: Block,
    index: usize,
    step: f64,
) -> f64 {
    let probe = |delta: f64| {
        let (mut s, mut h, mut o) = (out.s.to_vec(), out.h.to_vec(), out.o.to_vec());
        match block {
            Block::S => s[index] += delta,
            Block::H => h[index] += delta,
            Block::O => o[index] += delta,
        }
        residual_oracle(Outputs { s: &s, h: &h, o: &o }, image, templates, gaze, config)
    };
    let (plus, minus) = (probe(step), probe(-step));
    let diff = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(p, m)| (p - m) * (p + m)).sum::<f64>();
    let delta = config.c0 * diff(&plus.image_match, &minus.image_match)
        + config.c1 * diff(&plus.template_match, &minus.template_match)
        + config.c2 * (plus.s_excess - minus.s_excess) * (plus.s_excess + minus.s_excess)
        + config.c3 * (plus.o_excess - minus.o_excess) * (plus.o_excess + minus.o_excess);
    delta / (2.0 * step)
}

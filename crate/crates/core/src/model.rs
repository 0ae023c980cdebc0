//! Domain types shared by every stage of the network: pixel grids, the
//! template set, the configuration, neuron block states, and the windowed
//! image read `Z` that couples the gaze position to the S and H blocks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{ConfigViolation, Error, Result};

/// Dense row-major grid of reals.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Grid {
    pub fn filled(rows: usize, cols: usize, value: f64) -> Self {
        Self {
            rows,
            cols,
            data: vec![value; rows * cols],
        }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::filled(rows, cols, 0.0)
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::InvalidInput(format!(
                "grid of {rows}x{cols} needs {} values, got {}",
                rows * cols,
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.cols + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: f64) {
        self.data[row * self.cols + col] = value;
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn max_value(&self) -> f64 {
        self.data.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Number of cells whose binarized values (threshold 0.5) differ.
    pub fn hamming(&self, other: &Grid) -> usize {
        assert_eq!(self.shape(), other.shape(), "hamming distance needs equal shapes");
        self.data
            .iter()
            .zip(&other.data)
            .filter(|(a, b)| (**a >= 0.5) != (**b >= 0.5))
            .count()
    }
}

fn check_unit_range(grid: &Grid) -> Result<()> {
    for r in 0..grid.rows() {
        for c in 0..grid.cols() {
            let value = grid.get(r, c);
            if !(0.0..=1.0).contains(&value) {
                return Err(Error::PixelRange { row: r, col: c, value });
            }
        }
    }
    Ok(())
}

/// The pixel field the gaze moves over. Reads outside the field are zero.
#[derive(Debug, Clone, PartialEq)]
pub struct Image {
    pixels: Grid,
}

impl Image {
    pub fn new(pixels: Grid) -> Result<Self> {
        if pixels.is_empty() {
            return Err(Error::InvalidInput("image must have at least one pixel".into()));
        }
        check_unit_range(&pixels)?;
        Ok(Self { pixels })
    }

    pub fn blank(rows: usize, cols: usize) -> Self {
        assert!(rows >= 1 && cols >= 1, "image must have at least one pixel");
        Self {
            pixels: Grid::zeros(rows, cols),
        }
    }

    pub fn rows(&self) -> usize {
        self.pixels.rows()
    }

    pub fn cols(&self) -> usize {
        self.pixels.cols()
    }

    pub fn pixels(&self) -> &Grid {
        &self.pixels
    }

    /// Pixel at signed coordinates; zero outside the field.
    #[inline]
    pub fn at(&self, row: i64, col: i64) -> f64 {
        if row < 0 || col < 0 || row >= self.rows() as i64 || col >= self.cols() as i64 {
            0.0
        } else {
            self.pixels.get(row as usize, col as usize)
        }
    }
}

/// N binary prototypes of identical shape, one per output class.
#[derive(Debug, Clone, PartialEq)]
pub struct TemplateSet {
    rows: usize,
    cols: usize,
    templates: Vec<Grid>,
}

impl TemplateSet {
    pub fn new(templates: Vec<Grid>) -> Result<Self> {
        let first = templates
            .first()
            .ok_or_else(|| Error::InvalidInput("template set is empty".into()))?;
        let (rows, cols) = first.shape();
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidInput("templates must be non-empty grids".into()));
        }
        for t in &templates {
            if t.shape() != (rows, cols) {
                return Err(Error::ShapeMismatch {
                    what: "template",
                    expected: (rows, cols),
                    actual: t.shape(),
                });
            }
            check_unit_range(t)?;
        }
        Ok(Self {
            rows,
            cols,
            templates,
        })
    }

    pub fn len(&self) -> usize {
        self.templates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.templates.is_empty()
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, class: usize) -> &Grid {
        &self.templates[class]
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Grid> {
        self.templates.iter()
    }

    /// Pairwise Hamming distances, `n x n`, zero on the diagonal.
    pub fn pairwise_hamming(&self) -> Vec<Vec<usize>> {
        let n = self.len();
        let mut out = vec![vec![0; n]; n];
        for a in 0..n {
            for b in (a + 1)..n {
                let d = self.templates[a].hamming(&self.templates[b]);
                out[a][b] = d;
                out[b][a] = d;
            }
        }
        out
    }
}

/// Penalty weights, block geometry and relaxation parameters.
///
/// Field names follow the block they size: `s_*` is the saccade block
/// (X by Y), `h_*` the hidden block (I by J) and `classes` the output block (N).
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkConfig {
    /// Weight of the image-match term.
    pub c0: f64,
    /// Weight of the template-match term.
    pub c1: f64,
    /// Weight of the S-block winner-take-all term.
    pub c2: f64,
    /// Weight of the O-block winner-take-all term.
    pub c3: f64,
    pub s_rows: usize,
    pub s_cols: usize,
    pub h_rows: usize,
    pub h_cols: usize,
    pub classes: usize,
    pub dt: f64,
    pub max_steps: usize,
    pub conv_eps: f64,
    pub max_saccades: usize,
    pub seed: u64,
    pub init_noise: f64,
}

impl Default for NetworkConfig {
    fn default() -> Self {
        Self::location_identification()
    }
}

impl NetworkConfig {
    /// Cooperative location and identification: 9x9 saccade block, 8x8
    /// hidden block, four classes.
    pub fn location_identification() -> Self {
        Self {
            c0: 0.1,
            c1: 0.1,
            c2: 1.0,
            c3: 1.0,
            s_rows: 9,
            s_cols: 9,
            h_rows: 8,
            h_cols: 8,
            classes: 4,
            dt: 0.2,
            conv_eps: 1e-4,
            ..Self::dynamics_defaults()
        }
    }

    /// Shift-invariant recognition: 3x3 saccade block, 16x16 hidden block,
    /// ten classes.
    pub fn shift_invariant() -> Self {
        Self {
            c0: 0.2,
            c1: 0.1,
            c2: 2.0,
            c3: 10.0,
            s_rows: 3,
            s_cols: 3,
            h_rows: 16,
            h_cols: 16,
            classes: 10,
            dt: 0.05,
            conv_eps: 1e-4,
            ..Self::dynamics_defaults()
        }
    }

    /// Generic relaxation parameters (`dt = 0.01`, `conv_eps = 1e-6`,
    /// 5000 steps, 20 saccades, noise 0.01) with placeholder geometry.
    pub fn dynamics_defaults() -> Self {
        Self {
            c0: 0.0,
            c1: 0.0,
            c2: 0.0,
            c3: 0.0,
            s_rows: 1,
            s_cols: 1,
            h_rows: 1,
            h_cols: 1,
            classes: 1,
            dt: 0.01,
            max_steps: 5000,
            conv_eps: 1e-6,
            max_saccades: 20,
            seed: 0,
            init_noise: 0.01,
        }
    }

    /// Rows and columns of the Z table seen through the window: `(I+X, J+Y)`.
    pub fn window_shape(&self) -> (usize, usize) {
        (self.h_rows + self.s_rows, self.h_cols + self.s_cols)
    }

    /// `(floor((I+X)/2), floor((J+Y)/2))`, the offset between Z indices and
    /// image coordinates relative to the gaze.
    pub fn window_offset(&self) -> (i64, i64) {
        let (r, c) = self.window_shape();
        ((r / 2) as i64, (c / 2) as i64)
    }

    /// The saccade-block neuron that stands for the current gaze.
    pub fn s_center(&self) -> (usize, usize) {
        (self.s_rows / 2, self.s_cols / 2)
    }

    /// Image offset of the top-left H pixel, relative to the gaze, when the
    /// S winner is the center neuron.
    pub fn fixated_patch_offset(&self) -> (i64, i64) {
        let (or, oc) = self.window_offset();
        let (cr, cc) = self.s_center();
        (cr as i64 - or, cc as i64 - oc)
    }

    pub fn validate(&self) -> Result<&Self> {
        let mut v = Vec::new();
        let mut bad = |field: &'static str, reason: &str| {
            v.push(ConfigViolation {
                field,
                reason: reason.to_string(),
            })
        };
        for (field, value) in [("c0", self.c0), ("c1", self.c1), ("c2", self.c2), ("c3", self.c3)] {
            if !(value.is_finite() && value >= 0.0) {
                bad(field, "must be a finite value >= 0");
            }
        }
        for (field, value) in [
            ("X", self.s_rows),
            ("Y", self.s_cols),
            ("I", self.h_rows),
            ("J", self.h_cols),
            ("N", self.classes),
        ] {
            if value < 1 {
                bad(field, "must be >= 1");
            }
        }
        if !(self.dt.is_finite() && self.dt > 0.0) {
            bad("dt", "must be > 0");
        }
        if !(self.conv_eps.is_finite() && self.conv_eps > 0.0) {
            bad("conv_eps", "must be > 0");
        }
        if self.max_steps < 1 {
            bad("max_steps", "must be >= 1");
        }
        if self.max_saccades < 1 {
            bad("max_saccades", "must be >= 1");
        }
        if !(self.init_noise.is_finite() && self.init_noise >= 0.0) {
            bad("init_noise", "must be a finite value >= 0");
        }
        if v.is_empty() {
            Ok(self)
        } else {
            Err(Error::InvalidConfig(v))
        }
    }

    /// Checks that the template shape and count agree with `I`, `J`, `N`.
    pub fn check_templates(&self, templates: &TemplateSet) -> Result<()> {
        if (templates.rows(), templates.cols()) != (self.h_rows, self.h_cols) {
            return Err(Error::ShapeMismatch {
                what: "templates vs hidden block",
                expected: (self.h_rows, self.h_cols),
                actual: (templates.rows(), templates.cols()),
            });
        }
        if templates.len() != self.classes {
            return Err(Error::ShapeMismatch {
                what: "template count vs output block",
                expected: (1, self.classes),
                actual: (1, templates.len()),
            });
        }
        Ok(())
    }
}

pub fn validate_config(config: NetworkConfig) -> Result<NetworkConfig> {
    config.validate()?;
    Ok(config)
}

#[inline]
pub fn sigmoid(u: f64) -> f64 {
    1.0 / (1.0 + (-u).exp())
}

/// Activities and outputs of one block. Outputs are always `sigmoid(u)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockState {
    u: Grid,
    v: Grid,
}

impl BlockState {
    pub fn from_activities(u: Grid) -> Self {
        let mut v = u.clone();
        v.as_mut_slice().iter_mut().for_each(|x| *x = sigmoid(*x));
        Self { u, v }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::from_activities(Grid::zeros(rows, cols))
    }

    pub fn u(&self) -> &Grid {
        &self.u
    }

    pub fn v(&self) -> &Grid {
        &self.v
    }

    pub fn shape(&self) -> (usize, usize) {
        self.u.shape()
    }

    pub fn len(&self) -> usize {
        self.u.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u.is_empty()
    }

    pub fn output_sum(&self) -> f64 {
        self.v.as_slice().iter().sum()
    }

    /// Moves every activity by `-rate * grad` and refreshes the outputs.
    /// Returns the largest absolute output change.
    pub(crate) fn descend(&mut self, grad: &[f64], rate: f64) -> f64 {
        debug_assert_eq!(grad.len(), self.len());
        let mut max_dv = 0.0f64;
        for ((u, v), g) in self
            .u
            .as_mut_slice()
            .iter_mut()
            .zip(self.v.as_mut_slice())
            .zip(grad)
        {
            *u -= rate * g;
            let next = sigmoid(*u);
            max_dv = max_dv.max((next - *v).abs());
            *v = next;
        }
        max_dv
    }
}

/// The S (saccade), H (hidden) and O (output) blocks together.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkState {
    pub s: BlockState,
    pub h: BlockState,
    pub o: BlockState,
}

impl NetworkState {
    pub fn check_shape(&self, config: &NetworkConfig) -> Result<()> {
        let expect = [
            ("S block", self.s.shape(), (config.s_rows, config.s_cols)),
            ("H block", self.h.shape(), (config.h_rows, config.h_cols)),
            ("O block", self.o.shape(), (1, config.classes)),
        ];
        for (what, actual, expected) in expect {
            if actual != expected {
                return Err(Error::ShapeMismatch {
                    what,
                    expected,
                    actual,
                });
            }
        }
        Ok(())
    }
}

/// Gaze position as (row, column) into the image.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct GazeState {
    pub l: i64,
    pub m: i64,
}

impl GazeState {
    pub fn new(l: i64, m: i64) -> Self {
        Self { l, m }
    }
}

impl std::fmt::Display for GazeState {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{},{}", self.l, self.m)
    }
}

/// Window function A: one inside the `I x J` receptive field, zero outside.
pub fn window_mask(i: i64, j: i64, config: &NetworkConfig) -> u8 {
    let inside = (0..config.h_rows as i64).contains(&i) && (0..config.h_cols as i64).contains(&j);
    inside as u8
}

/// Windowed image read `Z[i, j]` for the gaze `(l, m)`.
///
/// Indices are sums of an H coordinate and an S coordinate, so the window
/// passes the `(I+X) x (J+Y)` table and blocks everything beyond it. Reads
/// outside the image are zero.
pub fn sample_z(image: &Image, gaze: GazeState, i: i64, j: i64, config: &NetworkConfig) -> f64 {
    let (rows, cols) = config.window_shape();
    if !(0..rows as i64).contains(&i) || !(0..cols as i64).contains(&j) {
        return 0.0;
    }
    let (or, oc) = config.window_offset();
    image.at(gaze.l + i - or, gaze.m + j - oc)
}

/// Fresh network state: activities are seeded uniform noise in
/// `[-init_noise, init_noise]`, drawn S block first, then H, then O.
pub fn init_state(config: &NetworkConfig) -> NetworkState {
    init_state_with_seed(config, config.seed)
}

pub(crate) fn init_state_with_seed(config: &NetworkConfig, seed: u64) -> NetworkState {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = config.init_noise;
    let mut block = |rows: usize, cols: usize| {
        let u = Grid::from_fn(rows, cols, |_, _| {
            if noise == 0.0 {
                0.0
            } else {
                rng.gen_range(-noise..=noise)
            }
        });
        BlockState::from_activities(u)
    };
    let s = block(config.s_rows, config.s_cols);
    let h = block(config.h_rows, config.h_cols);
    let o = block(1, config.classes);
    NetworkState { s, h, o }
}

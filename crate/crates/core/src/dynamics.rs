//! Relaxation of the network toward a stable state.
//!
//! Activities follow `du/dt = -∂E/∂V`, integrated with explicit Euler and
//! updated synchronously. Since `dV/du = σ'(u) > 0`, the continuous flow
//! satisfies `dE/dt = -Σ σ'(u) (∂E/∂V)² <= 0`; small steps inherit that
//! descent.

use crate::energy::{EnergyBreakdown, Landscape};
use crate::error::Result;
use crate::model::{BlockState, GazeState, Image, NetworkConfig, NetworkState, TemplateSet};

#[derive(Debug, Clone, PartialEq)]
pub struct RelaxationResult {
    pub state: NetworkState,
    pub steps: usize,
    pub converged: bool,
    /// Energy of the starting state.
    pub initial_energy: f64,
    /// Total energy after each step.
    pub energy_history: Vec<f64>,
    /// Breakdown of the final state's energy.
    pub final_energy: EnergyBreakdown,
}

/// The most active neuron of a block.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Winner {
    pub row: usize,
    pub col: usize,
    /// Row-major index.
    pub index: usize,
    pub value: f64,
}

/// Largest output; exact ties go to the smallest row-major index.
pub fn winner(block: &BlockState) -> Winner {
    let v = block.v();
    assert!(!v.is_empty(), "winner of an empty block");
    let mut best = 0;
    for (k, &x) in v.as_slice().iter().enumerate().skip(1) {
        if x > v.as_slice()[best] {
            best = k;
        }
    }
    Winner {
        row: best / v.cols(),
        col: best % v.cols(),
        index: best,
        value: v.as_slice()[best],
    }
}

impl Landscape<'_> {
    /// One synchronous Euler step. Returns the next state and the largest
    /// output change.
    pub fn step(&self, state: &NetworkState) -> Result<(NetworkState, f64)> {
        let (_, grad) = self.evaluate(state.into())?;
        Ok(self.apply(state, &grad))
    }

    fn apply(&self, state: &NetworkState, grad: &crate::energy::Gradient) -> (NetworkState, f64) {
        let dt = self.config().dt;
        let mut next = state.clone();
        let ds = next.s.descend(grad.d_s.as_slice(), dt);
        let dh = next.h.descend(grad.d_h.as_slice(), dt);
        let d_o = next.o.descend(&grad.d_o, dt);
        (next, ds.max(dh).max(d_o))
    }

    /// Steps until the largest output change drops below `conv_eps` or
    /// `max_steps` is reached.
    pub fn relax(&self, state: NetworkState) -> Result<RelaxationResult> {
        let cfg = self.config();
        let (initial, mut grad) = self.evaluate((&state).into())?;
        let mut current = state;
        let mut last = initial;
        let mut history = Vec::new();
        let mut converged = false;
        while history.len() < cfg.max_steps {
            let (next, max_dv) = self.apply(&current, &grad);
            let (e, g) = self.evaluate((&next).into())?;
            history.push(e.total);
            current = next;
            grad = g;
            last = e;
            if max_dv < cfg.conv_eps {
                converged = true;
                break;
            }
        }
        Ok(RelaxationResult {
            state: current,
            steps: history.len(),
            converged,
            initial_energy: initial.total,
            energy_history: history,
            final_energy: last,
        })
    }
}

pub fn step(
    state: &NetworkState,
    image: &Image,
    templates: &TemplateSet,
    gaze: GazeState,
    config: &NetworkConfig,
) -> Result<NetworkState> {
    state.check_shape(config)?;
    Ok(Landscape::new(image, templates, gaze, config)?.step(state)?.0)
}

pub fn relax(
    state: NetworkState,
    image: &Image,
    templates: &TemplateSet,
    gaze: GazeState,
    config: &NetworkConfig,
) -> Result<RelaxationResult> {
    state.check_shape(config)?;
    Landscape::new(image, templates, gaze, config)?.relax(state)
}

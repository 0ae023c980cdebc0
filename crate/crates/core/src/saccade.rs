//! The saccade loop: relax, read the S winner, move the gaze, repeat until
//! the winner sits at the center of the S block.

use crate::dynamics::winner;
use crate::energy::Landscape;
use crate::error::Result;
use crate::model::{init_state_with_seed, GazeState, Image, NetworkConfig, NetworkState, TemplateSet};

/// One fixation: the gaze it started from and the stable state reached there.
#[derive(Debug, Clone, PartialEq)]
pub struct Hop {
    pub gaze_before: GazeState,
    pub s_winner: (usize, usize),
    pub o_winner: usize,
    pub final_energy: f64,
    pub steps: usize,
    pub converged: bool,
    pub state: NetworkState,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SaccadeTrace {
    pub hops: Vec<Hop>,
}

impl SaccadeTrace {
    pub fn len(&self) -> usize {
        self.hops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.hops.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SaccadeResult {
    pub class_index: usize,
    pub final_gaze: GazeState,
    pub trace: SaccadeTrace,
    /// The gaze settled before the saccade cap was reached.
    pub terminated_naturally: bool,
}

/// Gaze after a saccade toward `s_winner`, clamped into the image.
pub fn update_gaze(
    gaze: GazeState,
    s_winner: (usize, usize),
    config: &NetworkConfig,
    image_shape: (usize, usize),
) -> GazeState {
    let (cx, cy) = config.s_center();
    let l = gaze.l + s_winner.0 as i64 - cx as i64;
    let m = gaze.m + s_winner.1 as i64 - cy as i64;
    GazeState {
        l: l.clamp(0, image_shape.0 as i64 - 1),
        m: m.clamp(0, image_shape.1 as i64 - 1),
    }
}

pub fn is_fixated(s_winner: (usize, usize), config: &NetworkConfig) -> bool {
    s_winner == config.s_center()
}

/// Fresh state for hop `hop_index`, seeded with `seed + hop_index`.
pub fn reset_between_hops(config: &NetworkConfig, hop_index: usize) -> NetworkState {
    init_state_with_seed(config, config.seed.wrapping_add(hop_index as u64))
}

pub fn run_saccades(
    image: &Image,
    templates: &TemplateSet,
    initial_gaze: GazeState,
    config: &NetworkConfig,
) -> Result<SaccadeResult> {
    config.validate()?;
    config.check_templates(templates)?;
    let mut gaze = initial_gaze;
    let mut trace = SaccadeTrace::default();
    let mut terminated_naturally = false;
    for hop_index in 0..config.max_saccades {
        let landscape = Landscape::new(image, templates, gaze, config)?;
        let relaxed = landscape.relax(reset_between_hops(config, hop_index))?;
        let s = winner(&relaxed.state.s);
        let o = winner(&relaxed.state.o);
        let s_winner = (s.row, s.col);
        trace.hops.push(Hop {
            gaze_before: gaze,
            s_winner,
            o_winner: o.index,
            final_energy: relaxed.final_energy.total,
            steps: relaxed.steps,
            converged: relaxed.converged,
            state: relaxed.state,
        });
        if is_fixated(s_winner, config) {
            terminated_naturally = true;
            break;
        }
        gaze = update_gaze(gaze, s_winner, config, (image.rows(), image.cols()));
    }
    let class_index = trace.hops.last().map(|h| h.o_winner).unwrap_or_default();
    Ok(SaccadeResult {
        class_index,
        final_gaze: gaze,
        trace,
        terminated_naturally,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaze_moves_by_winner_offset() {
        let cfg = NetworkConfig::location_identification();
        assert_eq!(update_gaze(GazeState::new(10, 10), (6, 4), &cfg, (30, 30)), GazeState::new(12, 10));
        assert_eq!(update_gaze(GazeState::new(10, 10), (4, 4), &cfg, (30, 30)), GazeState::new(10, 10));
    }

    #[test]
    fn gaze_is_clamped_to_the_image() {
        let cfg = NetworkConfig::location_identification();
        assert_eq!(update_gaze(GazeState::new(0, 0), (0, 0), &cfg, (30, 30)), GazeState::new(0, 0));
        assert_eq!(update_gaze(GazeState::new(28, 1), (8, 0), &cfg, (30, 30)), GazeState::new(29, 0));
    }

    #[test]
    fn fixation_is_the_center_neuron() {
        let big = NetworkConfig::location_identification();
        let small = NetworkConfig::shift_invariant();
        assert!(is_fixated((4, 4), &big));
        assert!(!is_fixated((4, 5), &big));
        assert!(is_fixated((1, 1), &small));
    }

    #[test]
    fn hop_states_are_reseeded() {
        let cfg = NetworkConfig::shift_invariant();
        assert_eq!(reset_between_hops(&cfg, 0), crate::model::init_state(&cfg));
        assert_eq!(reset_between_hops(&cfg, 3), reset_between_hops(&cfg, 3));
        assert_ne!(reset_between_hops(&cfg, 0), reset_between_hops(&cfg, 1));
        let quiet = NetworkConfig { init_noise: 0.0, ..cfg };
        assert_eq!(reset_between_hops(&quiet, 0), reset_between_hops(&quiet, 1));
    }
}

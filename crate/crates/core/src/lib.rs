//! A three-block Hopfield network that emulates saccades.
//!
//! The S block encodes where a pattern sits relative to the gaze, the H
//! block holds the patch under the gaze, and the O block names the class.
//! Relaxing the network's energy and moving the gaze toward the S winner
//! locates and identifies a pattern in one cooperative loop.

pub mod cli;
pub mod dynamics;
pub mod energy;
pub mod error;
pub mod model;
pub mod recognition;
pub mod saccade;

pub use error::{Error, Result};

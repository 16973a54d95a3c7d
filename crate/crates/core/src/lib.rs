//! Capacity-constrained evacuation planning under a moving shooter threat.

pub mod baselines;
pub mod error;
pub mod experiment;
pub mod graph;
pub mod planner;
pub mod rng;
pub mod sim;
pub mod threat;

pub use error::{Error, Result};

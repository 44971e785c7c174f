//! Batch experiment front end: structured configs in, deterministic reports out.

pub mod config;
pub mod runner;

pub use config::{ExperimentConfig, ExperimentKind, Tolerances};
pub use runner::{deterministic_blocks, run, RunOutcome};

//! Command-line front end and experiment harness for `rangecount`.

pub mod commands;
pub mod harness;
pub mod instances;

pub use harness::{run_sweep, trial_rng, Experiment, ExperimentConfig, Format, Summary, TrialRecord};

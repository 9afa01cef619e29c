//! Experiment driver behind the `pcc` command-line tool.

pub mod experiment;
pub mod report;
pub mod svg;
pub mod sweep;

pub use experiment::{builtin_spec, run_experiment, ExperimentId, ExperimentSpec};
pub use sweep::{sweep_mk, sweep_tau};

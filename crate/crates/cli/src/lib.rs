//! Library surface of the `bellsim` command-line runner: experiment
//! configuration, the scenario pipeline, and report emission. The binary
//! in `main.rs` is a thin argument-parsing wrapper over these functions
//! so the integration tests can drive runs in-process.

pub mod config;
pub mod pipeline;
pub mod report;

pub use config::{CliError, ExperimentConfig, OptimizeConfig};
pub use pipeline::{run_experiment, run_optimize, run_repro, Scenario};
pub use report::RunReport;

//! Experiment commands behind the `shus` binary.
//!
//! Each command takes an [`ExperimentConfig`], runs replicas on a rayon
//! pool sized by `threads`, and writes CSV/JSON files into `output_dir`.
//! Every CSV starts with the resolved configuration as `#` comment lines;
//! JSON files carry it in a `config` field. Results depend only on the
//! configuration and the seed, never on the number of workers.

pub mod cli;
mod commands;
mod config;
pub mod validate;

pub use commands::{
    cmd_exit_times, cmd_reference, cmd_trajectory, cmd_weight_stats, read_csv_body, with_threads, CellSummary,
    CommandReport, ExitSeries, ExitTimesOutput, SweepFit, WeightFitOutput,
};
pub use config::{ExperimentConfig, SchemeKind, WlUpdate};
pub use validate::{run_validation, CheckResult, ValidationReport, ValidationSizes};

/// Environment variable overriding `output_dir`.
pub const OUTPUT_DIR_ENV: &str = "SHUS_OUTPUT_DIR";

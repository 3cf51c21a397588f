//! Experiment runner: generate instances, run NISE, MONISE or the
//! random-weights baseline, and compare fronts by hypervolume.
//!
//! The random-weights baseline stands in for population-based contenders.
//! Comparison tables built from it are not reproductions of published tables.

pub mod baseline;
pub mod compare;
pub mod config;
pub mod error;
pub mod report;
pub mod run;

pub use baseline::{random_weights_baseline, sample_simplex, BaselineRun};
pub use compare::{compare_runs, ComparisonRow, ComparisonTable};
pub use config::{Algorithm, ProblemSpec, RunConfig};
pub use error::CliError;
pub use report::{evaluate_hypervolume, HypervolumeMode, HypervolumeReport, RunReport, RunStatus};
pub use run::{run_experiment, run_on_instance};

/// Exit status for a finished run.
pub fn exit_code_for(report: &RunReport) -> i32 {
    match report.status {
        RunStatus::Complete => 0,
        RunStatus::Timeout => 4,
    }
}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/cli.md")]
mod book_cli {}

//! Scenario runner for the Lorentzian distance toolkit.
//!
//! A scenario names a source (catalog model sample, distance matrix, or
//! sprinkled causal set), the check suites to run on it, and the
//! observations each suite is expected to report. See `scenarios/README.md`
//! for the file format.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod report;
pub mod run;
pub mod scenario;
pub mod suites;

pub use run::{exit, run, run_file, Format, RunOptions, RunOutcome, SEED_ENV, VERSION};
pub use scenario::{Scenario, Suite};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("scenario error: {0}")]
    Parse(String),
    #[error("suite failed: {0}")]
    Suite(String),
    #[error("cannot write output: {0}")]
    Output(String),
}

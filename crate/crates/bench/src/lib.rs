//! Experiment harness comparing the truncated geometric mechanism with
//! k-ary randomized response on counting queries over `[0, n]`.
//!
//! The harness samples from a prior, obfuscates each sample, reconstructs
//! the prior with the iterative Bayesian update, and scores the result with
//! the Kantorovich distance. See the `geoldp` binary for the CLI.

pub mod config;
pub mod error;
pub mod harness;
pub mod report;

pub use config::{ExperimentConfig, MechanismKind, MechanismSpec, PriorKind, PriorSpec};
pub use error::{BenchError, Result};
pub use harness::{
    find_cell, grid, run_cell, run_suite, CellFailure, CellId, CellLabel, CellOutput,
    ExperimentRecord, Prepared, SuiteOptions, SuiteOutcome,
};
pub use report::{mean_ratios, mechanism_profile, summarize, RatioRow, SummaryRow};

//! Command-line driver for the qcomb pipelines: analytic PSD, Monte Carlo
//! oracle, quantum-state diagnostics, coherence and the worked example.
//!
//! Exit codes: 0 success, 1 I/O error, 2 invalid configuration or
//! arguments, 3 oracle gate failure.

pub mod commands;
pub mod config;
pub mod error;
pub mod svg;

pub use commands::{load_config, run, Command, Overrides};
pub use config::{Format, RunConfig};
pub use error::{exit, CliError};

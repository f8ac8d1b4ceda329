//! Experiment driver for `srht-matmul`: matrix files, generators, seeded
//! Monte Carlo runs and CSV reports.

pub mod config;
pub mod error;
pub mod experiments;
pub mod generate;
pub mod io;

pub use config::{ExperimentConfig, Mode, Options};
pub use error::{CliError, Result};

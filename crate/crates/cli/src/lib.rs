//! Experiment harness behind the `sphwiener` binary: configuration,
//! Monte Carlo sweeps, raster output and self-checks.

pub mod config;
pub mod error;
pub mod experiment;
pub mod render;
pub mod validate;

pub use config::{ExperimentConfig, Method, Source};
pub use error::{CliError, CliResult};

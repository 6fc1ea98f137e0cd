//! Operator surface for the pointer-state laboratory: configuration,
//! experiment registry, reproducible artifact emission and unit
//! conversion.

pub mod config;
pub mod error;
pub mod experiment;
pub mod experiments;
pub mod output;
pub mod units;

pub use config::RunConfig;
pub use error::CliError;
pub use experiment::{find_experiment, registry, Experiment, RunContext};

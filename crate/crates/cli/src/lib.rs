//! Command-line driver: experiment files, simulations, LPs and exact verifications.

pub mod commands;
pub mod config;
pub mod error;
pub mod render;

pub use config::{parse_config, ExperimentConfig};
pub use error::CliError;

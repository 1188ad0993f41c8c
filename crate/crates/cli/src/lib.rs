//! Config-driven runner: solve, pattern, validate and benchmark commands
//! writing CSV/JSON artifacts.

pub mod commands;
pub mod config;
pub mod output;
pub mod pattern;

pub use commands::{CliError, Exit};
pub use config::{ConfigError, Resolved, RunConfig, WarmStart};

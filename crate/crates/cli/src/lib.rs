//! Command-line front end for `thermoprobe`: decay rates, parameter sweeps,
//! figure data, hardware scenarios and oracle cross-checks.

pub mod commands;
pub mod config;
pub mod error;
pub mod figures;
pub mod sweep;

pub use commands::{run, Cli};
pub use error::{CliError, CliResult};

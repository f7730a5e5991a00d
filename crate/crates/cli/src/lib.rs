//! Configuration, trace files and subcommands of the `extsum` binary.

pub mod commands;
pub mod config;
pub mod error;
pub mod tracefile;

pub use commands::{EXIT_ERROR, EXIT_HYPOTHESIS, EXIT_OK};
pub use config::{OutputFormat, PartialConfig, RunConfig};
pub use error::CliError;

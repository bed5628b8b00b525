//! Configuration, command dispatch and persistence for the `landau` binary.

pub mod commands;
pub mod config;
pub mod lab;

pub use commands::{run_command, summarize, CliError, Command, Paths};
pub use config::{load_config, parse_config, ConfigError, RunConfig, Suite};
pub use lab::Lab;

//! Library side of the scenario runner: configuration schema, subcommand
//! implementations, and the acceptance suite (shared between the binary and
//! the integration tests).

pub mod acceptance;
pub mod commands;
pub mod config;

//! Configuration, subcommands and file output of the `burgers-step` binary.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

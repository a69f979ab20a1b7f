//! Command-line front end: run configuration, reports and subcommands.

pub mod commands;
pub mod config;
pub mod error;
pub mod report;

//! Library side of the `faithkit` command-line tool.

pub mod checks;
pub mod commands;
pub mod config;
pub mod fixtures;

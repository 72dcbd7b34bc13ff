//! Configuration, sweeps and output for the `cfsim` command-line tool.

pub mod commands;
pub mod config;
pub mod emit;
pub mod sweep;
pub mod units;

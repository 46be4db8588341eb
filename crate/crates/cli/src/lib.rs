//! Batch CLI for the flexible-link control toolkit: configuration parsing,
//! subcommand dispatch and CSV/report emission.

pub mod commands;
pub mod config;
pub mod output;

//! Command-line runner for `monodr-core`: JSON run configs, report and trace
//! writers, and the `monodr` dispatcher.

pub mod cli;
pub mod config;
pub mod output;

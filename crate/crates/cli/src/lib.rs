//! Experiment harness for the multiplicity-window toolkit: configuration
//! loading, the four subcommands, and their report formats.

pub mod commands;
pub mod config;

pub use commands::{
    cmd_oracle, cmd_solve, cmd_sweep, cmd_thresholds, CmdError, CmdResult, EXIT_CONDITION_FAILED,
    EXIT_CONFIG, EXIT_LAMBDA_OUTSIDE, EXIT_OK, EXIT_ORACLE_PRECONDITION, EXIT_UNBOUNDED_WINDOW,
};
pub use config::{ConfigError, Experiment, Interval};

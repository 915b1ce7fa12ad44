//! Command-line front end: configuration parsing, report and diagram output,
//! the efficiency table, parameter sweeps and the invariant checks.

// `!(a < b)` is used on purpose so that NaN inputs take the error branch
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod check;
pub mod commands;
pub mod config;
pub mod error;
pub mod output;

pub use check::{run_checks, CheckRow, Scope};
pub use commands::{cmd_run, cmd_sweep, cmd_table, simulate, sweep, SweepPoint, SweepRequest};
pub use config::{load_config, parse_config, RunConfig};
pub use error::{exit, CliError, CliResult};

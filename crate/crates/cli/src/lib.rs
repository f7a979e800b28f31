//! Command-line front end: formula syntax, event logs and the `check`,
//! `monitor` and `verify` commands.

pub mod commands;
pub mod log;
pub mod syntax;

pub use commands::CliError;
pub use syntax::{parse_formula, print_formula};

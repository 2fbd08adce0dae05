//! Library side of the `dti-lab` command: configuration handling, the
//! identity suites behind `verify`, and the report writers.

pub mod config;
pub mod error;
pub mod experiments;
pub mod verify;

pub use error::{CliError, CliResult, EXIT_FAIL, EXIT_PASS, EXIT_USAGE};

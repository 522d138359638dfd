//! Command-line front end, file formats and parallel sweeps for `ndrt-core`.

pub mod cli;
pub mod config;
pub mod error;
pub mod io;
pub mod sweep;
pub mod verify;

pub use error::{CliError, CliResult};

//! Command implementations behind the `tall` binary.

pub mod analyze;
pub mod bbox;
pub mod config;
pub mod dataset;
pub mod error;
pub mod io;
pub mod manifest;
pub mod preview;

pub use error::{CliError, Result};

//! Experiment harness: configuration, runners, report output and file formats.

pub mod cli;
pub mod config;
pub mod constants;
pub mod error;
pub mod family;
pub mod format;
pub mod pgm;
pub mod pool;
pub mod report;
pub mod runners;

pub use error::{HarnessError, Result};

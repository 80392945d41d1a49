//! Command-line front end: argument parsing, config merging and JSON/SVG/CSV emission.

pub mod commands;
pub mod document;
pub mod json;
pub mod parse;
pub mod svg;

pub use commands::{execute, Cli, Outcome, RunConfig};

/// Failures that end a run early, with their exit codes.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CliError {
    #[error("usage error: {0}")]
    Usage(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Numerical(_) => 4,
            CliError::Io(_) => 1,
        }
    }
}

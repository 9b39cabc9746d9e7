//! Error type for the command-line front end, with the process exit code
//! each class maps to.

use onair_core::CoreError;
use std::error::Error;
use std::fmt;

/// Errors surfaced by the command-line tools.
#[derive(Debug)]
pub enum CliError {
    /// Bad configuration: unknown or missing keys, malformed values, or a
    /// parameter set the reconstruction rejects. Exit code 2.
    Config(String),
    /// File-system or file-format failures, including malformed tensor
    /// files. Exit code 3.
    Io(String),
    /// The reconstruction reached a numerically degenerate state. Exit
    /// code 4.
    Degenerate(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Io(_) => 3,
            CliError::Degenerate(_) => 4,
        }
    }

    /// Annotates an I/O error with the path it concerns.
    pub fn io(path: &std::path::Path, err: impl fmt::Display) -> CliError {
        CliError::Io(format!("{}: {err}", path.display()))
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(msg) => write!(f, "configuration error: {msg}"),
            CliError::Io(msg) => write!(f, "i/o error: {msg}"),
            CliError::Degenerate(msg) => write!(f, "numerical degeneracy: {msg}"),
        }
    }
}

impl Error for CliError {}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::InvalidArgument(msg) => CliError::Config(msg),
            CoreError::NumericalDegeneracy(msg) => CliError::Degenerate(msg),
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

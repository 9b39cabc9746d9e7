//! Error type shared by all toolkit operations.

use std::error::Error;
use std::fmt;

/// Errors produced by the reconstruction toolkit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CoreError {
    /// An argument violated a documented precondition: dimension mismatch,
    /// out-of-range parameter, or inconsistent configuration.
    InvalidArgument(String),
    /// A computation reached a numerically degenerate state it cannot
    /// resolve, such as a singular linear system or a non-convergent
    /// iteration.
    NumericalDegeneracy(String),
}

impl fmt::Display for CoreError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CoreError::InvalidArgument(msg) => write!(f, "invalid argument: {msg}"),
            CoreError::NumericalDegeneracy(msg) => write!(f, "numerical degeneracy: {msg}"),
        }
    }
}

impl Error for CoreError {}

/// Result alias for toolkit operations.
pub type Result<T> = std::result::Result<T, CoreError>;

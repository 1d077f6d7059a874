//! Crate-wide error type.

use thiserror::Error;

/// Unified error for parsing, validation, solving, and analysis.
#[derive(Debug, Error)]
pub enum Error {
    /// Netlist text could not be parsed. Line numbers are 1-based.
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    /// A netlist or parameter set violates a structural invariant.
    #[error("{0}")]
    Invalid(String),

    /// The nodal system could not be solved.
    #[error("{0}")]
    Singular(String),

    /// An iterative numerical routine failed to converge or was misused.
    #[error("{0}")]
    Numerics(String),

    /// Command-line usage error.
    #[error("{0}")]
    Usage(String),

    #[error("{0}")]
    Io(#[from] std::io::Error),

    #[error("{0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit code for the CLI: 1 for user errors, 2 for
    /// internal/numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Singular(_) | Error::Numerics(_) => 2,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

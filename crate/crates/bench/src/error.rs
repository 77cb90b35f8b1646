use std::path::PathBuf;

use bak_core::SolveError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// Malformed matrix file. `row` is 1-based; 0 refers to the header.
    #[error("format error at row {row}: {message}")]
    Format { row: usize, message: String },

    /// Malformed suite file; `line` is 1-based.
    #[error("suite line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Solve(#[from] SolveError),

    #[error("{0}")]
    Usage(String),
}

impl BenchError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        BenchError::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn format(row: usize, message: impl Into<String>) -> Self {
        BenchError::Format {
            row,
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, BenchError>;

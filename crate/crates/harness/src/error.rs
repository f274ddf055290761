use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("{path}: {message}")]
    Io { path: PathBuf, message: String },

    /// Malformed JSON or a field of the wrong type.
    #[error("{path}:{line}:{column}: {key}: {message}")]
    Parse { path: PathBuf, line: usize, column: usize, key: String, message: String },

    /// Every problem found while checking a parsed scenario.
    #[error("scenario is invalid:\n  - {}", .0.join("\n  - "))]
    Validation(Vec<String>),

    #[error(transparent)]
    Core(#[from] refofdm::Error),

    #[error("{0}")]
    Runtime(String),
}

impl HarnessError {
    pub(crate) fn io(path: impl Into<PathBuf>, err: impl std::fmt::Display) -> Self {
        HarnessError::Io { path: path.into(), message: err.to_string() }
    }

    /// Process exit code: 1 for bad input, 2 for anything that failed while
    /// running.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Parse { .. } | HarnessError::Validation(_) => 1,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, HarnessError>;

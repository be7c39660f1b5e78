use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, NbmfError>;

#[derive(Debug, Error)]
pub enum NbmfError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("capacity exceeded: {requested} variables requested, limit is {limit}")]
    Capacity { requested: usize, limit: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error("invalid input: {0}")]
    Validation(String),

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: u64,
        message: String,
    },

    #[error("unsupported record schema `{found}` (expected `{expected}`)")]
    SchemaVersion { found: String, expected: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl NbmfError {
    pub(crate) fn dim(msg: impl Into<String>) -> Self {
        NbmfError::Dimension(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        NbmfError::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by bad user input rather than an internal failure.
    /// The CLI maps these to exit code 2.
    pub fn is_validation(&self) -> bool {
        match self {
            NbmfError::Io { source, .. } => source.kind() == std::io::ErrorKind::NotFound,
            _ => true,
        }
    }
}

use std::path::{Path, PathBuf};

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("{}: line {line}: {message}", path.display())]
    ParseInFile {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("model format: {0}")]
    Format(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("rule cannot be measured: {0}")]
    Unmeasurable(String),

    #[error("rank records do not line up; missing keys: {0}")]
    KeyMismatch(String),

    #[error("instance too large for exhaustive enumeration ({0} states)")]
    InstanceTooLarge(usize),
}

impl Error {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        Error::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    /// Attaches a file path to a bare parse or I/O error.
    pub(crate) fn in_file(self, path: &Path) -> Self {
        match self {
            Error::Parse { line, message } => Error::ParseInFile {
                path: path.to_path_buf(),
                line,
                message,
            },
            Error::Io { source, .. } => Error::io(path, source),
            other => other,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(source: std::io::Error) -> Self {
        Error::Io {
            path: PathBuf::new(),
            source,
        }
    }
}

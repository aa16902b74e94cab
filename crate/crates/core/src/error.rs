//! Crate-wide error type.

use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Bad user input or configuration. Maps to exit code 1.
    #[error("config: {0}")]
    Config(String),

    /// A structural invariant of the data model was violated. Maps to exit
    /// code 2; indicates corrupt inputs or an internal bug.
    #[error("invariant violated: {0}")]
    Invariant(String),

    /// A recoverable per-line failure, reported with its 1-based line number.
    #[error("line {line}: {message}")]
    Line { line: u64, message: String },

    /// TER is undefined when the reference side is empty.
    #[error("TER undefined: empty reference")]
    EmptyReference,

    /// Translation backend failure after retries were exhausted.
    #[error("backend: {0}")]
    Backend(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn format(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        Error::Format {
            path: path.into(),
            message: message.into(),
        }
    }

    pub fn line(line: u64, message: impl Into<String>) -> Self {
        Error::Line {
            line,
            message: message.into(),
        }
    }

    /// Process exit code convention: 1 for input/config problems, 2 for
    /// invariant violations.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Invariant(_) => 2,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

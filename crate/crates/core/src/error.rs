use std::path::PathBuf;

use thiserror::Error;

/// Errors raised across the crate.
///
/// Each variant maps onto one CLI exit status (see [`Error::exit_code`]).
#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("{field}: {message}")]
    Invalid { field: String, message: String },

    #[error("numeric error: {message}")]
    Numeric { message: String, index: Option<usize> },

    #[error("unsupported loss family for {operation}: {family}")]
    UnsupportedFamily {
        operation: &'static str,
        family: String,
    },

    #[error("instance too large for exhaustive oracle: {0}")]
    SizeLimit(String),

    #[error("unsupported {format} version {found} (expected {expected})")]
    UnsupportedVersion {
        format: &'static str,
        found: String,
        expected: u32,
    },

    #[error("parse error in {path} at line {line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn invalid(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Invalid {
            field: field.into(),
            message: message.into(),
        }
    }

    pub(crate) fn numeric(msg: impl Into<String>, index: Option<usize>) -> Self {
        Error::Numeric {
            message: msg.into(),
            index,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit status for this error: 3 configuration, 4 numeric, 5 I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_)
            | Error::Invalid { .. }
            | Error::UnsupportedFamily { .. }
            | Error::SizeLimit(_) => 3,
            Error::Numeric { .. } => 4,
            Error::UnsupportedVersion { .. } | Error::Parse { .. } | Error::Io { .. } => 5,
        }
    }
}

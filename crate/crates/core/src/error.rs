use std::path::PathBuf;

use thiserror::Error;

use crate::config::ValidationReport;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration:\n{0}")]
    Config(ValidationReport),

    #[error("usage: {0}")]
    Usage(String),

    #[error("{path}: cannot read configuration: {message}")]
    ConfigParse { path: PathBuf, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// Structural problem in an input file, e.g. a malformed header.
    #[error("{path}:{line}: {message}")]
    Format {
        path: PathBuf,
        line: u64,
        message: String,
    },

    /// A cell that should hold a number does not.
    #[error("{path}: row {row}, column {column}: cannot parse {cell:?} as a number")]
    Parse {
        path: PathBuf,
        row: u64,
        column: usize,
        cell: String,
    },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("zero spread: {0}")]
    ZeroSpread(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("domain error: {0}")]
    Domain(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code: 1 usage/config, 2 I/O, 3 data/format.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Usage(_) | Error::ConfigParse { .. } => 1,
            Error::Io { .. } => 2,
            Error::Format { .. }
            | Error::Parse { .. }
            | Error::Degenerate(_)
            | Error::EmptyInput(_)
            | Error::ZeroSpread(_)
            | Error::Shape(_)
            | Error::Domain(_) => 3,
        }
    }
}

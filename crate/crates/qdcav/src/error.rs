use std::path::PathBuf;

use thiserror::Error;

/// Process exit status for a configuration problem.
pub const EXIT_CONFIG: u8 = 2;
/// Process exit status for a numerical failure.
pub const EXIT_NUMERICAL: u8 = 3;

#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("cannot parse {path}: {message}")]
    ConfigFile { path: PathBuf, message: String },
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("{count} of {total} grid points failed; see the error column of {path}")]
    FailedRows { count: usize, total: usize, path: String },
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("CSV error on {path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
}

impl Error {
    pub fn exit_code(&self) -> u8 {
        match self {
            Error::Config(_) | Error::ConfigFile { .. } | Error::Io { .. } | Error::Csv { .. } => EXIT_CONFIG,
            Error::Numerical(_) | Error::FailedRows { .. } => EXIT_NUMERICAL,
        }
    }

    pub fn numerical(e: impl std::fmt::Display) -> Self {
        Error::Numerical(e.to_string())
    }

    pub fn config(e: impl std::fmt::Display) -> Self {
        Error::Config(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the function.
    #[error("domain error: {0}")]
    Domain(String),

    /// An iterative kernel hit its iteration cap.
    #[error("{routine} did not converge after {iterations} iterations")]
    Convergence {
        routine: &'static str,
        iterations: usize,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    /// A self-check (engine consistency, trend verdicts) did not pass.
    #[error("check failed: {0}")]
    CheckFailed(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    /// Process exit code for the CLI: 1 configuration, 2 numerical, 3 I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::InsufficientData(_) => 1,
            Error::Domain(_) | Error::Convergence { .. } | Error::CheckFailed(_) => 2,
            Error::Io { .. } | Error::Csv { .. } => 3,
        }
    }
}

use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Core(#[from] mz_core::Error),
    #[error("trace-ratio problems need m > 2p (got m = {m}, p = {p})")]
    ConstraintViolated { m: usize, p: usize },
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Config {
        path: PathBuf,
        source: toml::de::Error,
    },
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Errors caused by how the program was invoked rather than by a run.
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            Error::Usage(_)
                | Error::ConstraintViolated { .. }
                | Error::Config { .. }
                | Error::Core(mz_core::Error::InvalidConfig(_))
                | Error::Core(mz_core::Error::InvalidDimensions(_))
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

use std::path::PathBuf;

use thiserror::Error;

/// Failures of the command-line front end, each mapped to an exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: sphwiener::Error,
    },
    #[error("numerical failure: {0}")]
    Numerical(sphwiener::Error),
    #[error("validation failed: {0}")]
    Validation(String),
}

impl CliError {
    /// 2 for configuration and input problems, 3 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) | Self::Io { .. } => 2,
            Self::Numerical(_) | Self::Validation(_) => 3,
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: impl Into<sphwiener::Error>) -> Self {
        Self::Io {
            path: path.into(),
            source: source.into(),
        }
    }
}

impl From<sphwiener::Error> for CliError {
    fn from(e: sphwiener::Error) -> Self {
        use sphwiener::Error as E;
        match e {
            E::InvalidBandlimit { .. }
            | E::InvalidScaleRange { .. }
            | E::InvalidDilation(_)
            | E::NotUnitNorm { .. }
            | E::KappaOutOfRange(_)
            | E::InvalidInput(_)
            | E::UndersampledGrid { .. } => Self::Config(e.to_string()),
            other => Self::Numerical(other),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

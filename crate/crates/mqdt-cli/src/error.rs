use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{location}: {message}")]
    Config { location: String, message: String },
    #[error("missing setting `{key}` (give it in the config file or as --{flag})")]
    Missing { key: &'static str, flag: &'static str },
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    DataFile { path: PathBuf, source: mqdt::measurements::DataFileError },
    #[error(transparent)]
    Data(#[from] mqdt::physics::DataError),
    #[error("{context}: {source}")]
    Scattering { context: String, source: mqdt::mqdt::MqdtError },
    #[error(transparent)]
    LongRange(#[from] mqdt::longrange::LongRangeError),
    #[error(transparent)]
    Trap(#[from] mqdt::trap::TrapError),
    #[error(transparent)]
    Shift(#[from] mqdt::shift::ShiftError),
    #[error(transparent)]
    Angular(#[from] mqdt::angular::AngularError),
    #[error("csv output: {0}")]
    Csv(#[from] csv::Error),
}

impl CliError {
    /// Short stable tag for the machine-readable error line.
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Config { .. } | CliError::Missing { .. } => "config",
            CliError::Io { .. } | CliError::Csv(_) => "io",
            CliError::DataFile { .. } => "data",
            CliError::Data(_) => "dataset",
            CliError::Scattering { .. } => "scattering",
            CliError::LongRange(_) => "long-range",
            CliError::Trap(_) => "trap",
            CliError::Shift(_) => "shift",
            CliError::Angular(_) => "angular",
        }
    }

    pub fn config(location: impl Into<String>, message: impl Into<String>) -> Self {
        CliError::Config { location: location.into(), message: message.into() }
    }
}

use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("schema error in {file} at {pointer}: {message}")]
    Schema { file: String, pointer: String, message: String },

    #[error("certificate check failed at {location}: {message}")]
    Certificate { location: String, message: String },

    #[error(transparent)]
    Core(#[from] ostrowski::Error),

    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },

    #[error("csv output: {0}")]
    Csv(#[from] csv::Error),
}

impl CliError {
    /// 2 for anything wrong with the input, 1 for failed runs and certificates.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Schema { .. } => 2,
            CliError::Core(ostrowski::Error::Domain(_) | ostrowski::Error::Parse(_)) => 2,
            _ => 1,
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }

    /// Attaches a JSON pointer to a value error found after parsing.
    pub fn at(file: &str, pointer: impl Into<String>, err: ostrowski::Error) -> Self {
        CliError::Schema { file: file.to_string(), pointer: pointer.into(), message: err.to_string() }
    }
}

pub type CliResult<T> = Result<T, CliError>;

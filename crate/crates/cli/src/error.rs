use std::process::ExitCode;

use thiserror::Error;

/// CLI failure, split by exit code: usage/config problems exit 2, anything
/// that goes wrong after the inputs were accepted exits 1.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        match self {
            CliError::Usage(_) => ExitCode::from(2),
            CliError::Runtime(_) => ExitCode::from(1),
        }
    }

    pub fn io(path: &std::path::Path, e: impl std::fmt::Display) -> Self {
        CliError::Runtime(format!("{}: {e}", path.display()))
    }
}

impl From<kdehpd::Error> for CliError {
    fn from(e: kdehpd::Error) -> Self {
        use kdehpd::Error as E;
        match e {
            E::InvalidParameter(_)
            | E::InvalidSplit(_)
            | E::InvalidData(_)
            | E::DimensionMismatch { .. } => CliError::Usage(e.to_string()),
            _ => CliError::Runtime(e.to_string()),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

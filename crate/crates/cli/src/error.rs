use thiserror::Error;

use spnet::train::TrainError;

/// Process exit codes.
pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    /// Unreadable or malformed input, bad configuration, unwritable output.
    #[error("{0:#}")]
    Input(anyhow::Error),
    /// Training diverged or produced non-finite values.
    #[error("{0:#}")]
    Numeric(anyhow::Error),
}

impl CliError {
    pub fn input(e: impl Into<anyhow::Error>) -> Self {
        CliError::Input(e.into())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => EXIT_INPUT,
            CliError::Numeric(_) => EXIT_NUMERIC,
        }
    }
}

impl From<TrainError> for CliError {
    fn from(e: TrainError) -> Self {
        if e.is_numeric() {
            CliError::Numeric(e.into())
        } else {
            CliError::Input(e.into())
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

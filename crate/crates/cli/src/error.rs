use polyaug_eval::EvalError;
use thiserror::Error;

/// Failures grouped by exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Io(String),
    #[error("{0}")]
    Adapter(String),
}

impl CliError {
    /// 1 validation, 2 I/O, 3 adapter failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Io(_) => 2,
            CliError::Adapter(_) => 3,
        }
    }
}

impl From<polyaug_core::Error> for CliError {
    fn from(e: polyaug_core::Error) -> Self {
        use polyaug_core::Error::*;
        match e {
            Io(_) | Asset(_) | Format(_) => CliError::Io(e.to_string()),
            _ => CliError::Validation(e.to_string()),
        }
    }
}

impl From<EvalError> for CliError {
    fn from(e: EvalError) -> Self {
        match e {
            EvalError::Core(c) => c.into(),
            EvalError::Adapter(_) => CliError::Adapter(e.to_string()),
            EvalError::Dataset(_) => CliError::Validation(e.to_string()),
            EvalError::Io(_) | EvalError::Csv(_) | EvalError::Json(_) => CliError::Io(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

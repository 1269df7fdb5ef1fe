use std::process::ExitCode;

use thiserror::Error;

/// Failure of a CLI run, carrying the process exit status it maps to.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error("numerical tolerance failure: {0}")]
    Tolerance(String),

    #[error("admissibility failure: condition \"{condition}\" violated ({detail})")]
    Admissibility { condition: String, detail: String },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(match self {
            CliError::Config(_) => 2,
            CliError::Tolerance(_) => 3,
            CliError::Admissibility { .. } => 4,
            CliError::Io(_) => 1,
        })
    }
}

impl From<renormlab::Error> for CliError {
    fn from(e: renormlab::Error) -> Self {
        use renormlab::Error as E;
        match e {
            E::InvalidInput(msg) => CliError::Config(msg),
            E::Admissibility { condition, detail } => CliError::Admissibility { condition, detail },
            other => CliError::Tolerance(other.to_string()),
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

pub fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

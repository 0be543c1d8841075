use std::path::PathBuf;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration: {field}: {message}")]
    ConfigInvalid { field: String, message: String },
    #[error("solver failure: {context}: {source}")]
    SolverFailure {
        context: String,
        #[source]
        source: Box<dyn std::error::Error + Send + Sync>,
    },
    #[error("I/O error at {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("verification failed: {0} check(s) did not pass")]
    VerificationFailed(usize),
}

impl CliError {
    pub fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        CliError::ConfigInvalid { field: field.into(), message: message.into() }
    }

    pub fn solver<E: std::error::Error + Send + Sync + 'static>(context: impl Into<String>, err: E) -> Self {
        CliError::SolverFailure { context: context.into(), source: Box::new(err) }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }

    /// Process exit status: 2 configuration, 3 solver or I/O, 4 verification.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::ConfigInvalid { .. } => 2,
            CliError::SolverFailure { .. } | CliError::Io { .. } => 3,
            CliError::VerificationFailed(_) => 4,
        }
    }
}

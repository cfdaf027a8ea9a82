use std::path::Path;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("missing input: {0}")]
    MissingInput(String),
    #[error("invalid config: {0}")]
    Config(String),
    #[error("run diverged: {0}")]
    Diverged(String),
    #[error("self-test failed: {0} check(s)")]
    SelfTest(usize),
    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Solver(#[from] fbfep_core::Error),
    #[error("output error: {0}")]
    Output(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::MissingInput(_) => 2,
            CliError::Config(_) => 3,
            CliError::Diverged(_) => 4,
            CliError::SelfTest(_) | CliError::Io { .. } | CliError::Solver(_) | CliError::Output(_) => 1,
        }
    }

    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io { context: path.display().to_string(), source }
    }
}

pub type CliResult<T> = Result<T, CliError>;

/// Solver-side validation failures are configuration problems from the
/// user's point of view.
pub fn invalid(e: impl std::fmt::Display) -> CliError {
    CliError::Config(e.to_string())
}

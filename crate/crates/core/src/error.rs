use thiserror::Error;

/// Errors raised by the operators, schedules and solvers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("schedules are 1-based; index 0 is undefined")]
    ScheduleIndex,
    #[error("numerical divergence at iteration {iteration}")]
    Divergence { iteration: usize },
    #[error("affine constraint set is empty")]
    Infeasible,
    #[error("linear system has no unique solution")]
    Singular,
    #[error("usage error: {0}")]
    Usage(String),
    #[error("undefined input: {0}")]
    Undefined(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::Dimension { expected, got })
    }
}

pub(crate) fn param(msg: impl Into<String>) -> Error {
    Error::Parameter(msg.into())
}

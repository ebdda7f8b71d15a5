use thiserror::Error;

/// Errors raised by the solvers and observables.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error(
        "grid too short: truncated tail carries {tail_mass:.3e} of the norm (limit {limit:.1e})"
    )]
    GridTooShort { tail_mass: f64, limit: f64 },

    #[error("grids differ: {0}")]
    GridMismatch(String),

    #[error("time step {dt} violates dt = dr/c = {expected}")]
    CflViolation { dt: f64, expected: f64 },

    #[error("history underflow: {0}")]
    HistoryUnderflow(String),

    #[error("insufficient history: {0}")]
    InsufficientHistory(String),

    #[error("negative time {0}")]
    NegativeTime(f64),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("non-physical density matrix: {0}")]
    NonPhysical(String),

    #[error(
        "quadrature did not converge: estimated error {error:.3e} after {intervals} intervals"
    )]
    Quadrature { error: f64, intervals: usize },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}

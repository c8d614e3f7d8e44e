//! Error type shared by construction, validation, and pipeline operations.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("structure constants are not antisymmetric (residual {residual:.3e})")]
    NotAntisymmetric { residual: f64 },

    #[error("Jacobi identity fails (residual {residual:.3e})")]
    JacobiFailure { residual: f64 },

    #[error("gram matrix is not symmetric positive-definite: {reason}")]
    NotPositiveDefinite { reason: String },

    #[error("metric is not cyclic (residual {residual:.3e})")]
    NotCyclic { residual: f64 },

    #[error("rank condition fails: {0}")]
    RankDeficient(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("internal invariant violated: {0}")]
    InvariantViolation(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code used by the command-line interface.
    ///
    /// 2 = validation failure, 3 = i/o or parse failure, 4 = an internal
    /// invariant (cross-check between independent computation routes,
    /// post-condition of a verified construction) was violated.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io(_) | Error::Parse(_) => 3,
            Error::InvariantViolation(_) => 4,
            _ => 2,
        }
    }
}

//! Crate-wide error type.

/// Errors reported by the numerical kernels and solvers.
#[derive(Debug, Clone, thiserror::Error)]
pub enum Error {
    /// Operand shapes do not line up.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    /// A parameter violates a documented precondition.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    /// A matrix expected to be symmetric positive definite is not.
    #[error("matrix is not positive definite: {0}")]
    NotPositiveDefinite(String),
    /// A frame or system lost numerical rank.
    #[error("rank deficiency: {0}")]
    RankDeficient(String),
    /// An eigenvalue iteration failed to converge.
    #[error("eigensolver failure: {0}")]
    EigenFailed(String),
    /// A NaN or infinity appeared where a finite value is required.
    #[error("non-finite value: {0}")]
    NonFinite(String),
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn dim(msg: impl Into<String>) -> Self {
        Error::DimensionMismatch(msg.into())
    }

    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}

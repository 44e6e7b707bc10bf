use thiserror::Error;

/// Errors shared by every module in the crate.
#[derive(Debug, Error)]
pub enum QxError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("matrix is not Hermitian (residual {residual:.3e})")]
    Hermiticity { residual: f64 },
    #[error("matrix is not unitary (residual {residual:.3e})")]
    Unitarity { residual: f64 },
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("internal invariant violated: {0}")]
    Invariant(String),
    #[error("special-case precondition violated: {0}")]
    SpecialCase(String),
}

pub type Result<T> = std::result::Result<T, QxError>;

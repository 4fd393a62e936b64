use thiserror::Error;

/// Errors produced by the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("matrix is not positive definite: eigenvalue {eigenvalue} <= tolerance {tol}")]
    NotPositiveDefinite { eigenvalue: f64, tol: f64 },

    #[error("eigensolver did not converge after {sweeps} sweeps (off-diagonal residual {residual})")]
    EigenNoConvergence { sweeps: usize, residual: f64 },

    #[error("index {index} out of range for length {len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("no {degree}-regular graph on {vertices} vertices exists")]
    NoRegularGraph { vertices: usize, degree: usize },

    #[error("enumeration budget exceeded: {required} > {budget}")]
    BudgetExceeded { required: u128, budget: u128 },

    #[error("unsupported operation: {0}")]
    Unsupported(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("matrix has non-finite entries")]
    NonFinite,

    #[error("matrix is not unitary: residual {residual:e} exceeds tolerance {tolerance:e}")]
    NotUnitary { residual: f64, tolerance: f64 },

    #[error("state vector is not normalized: norm {norm}")]
    NotNormalized { norm: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("eigendecomposition did not converge")]
    NoConvergence,

    /// A check that the mathematics guarantees came out false. Either the
    /// implementation or floating point accuracy is at fault.
    #[error("guaranteed bound violated: {0}")]
    BoundViolation(String),

    #[error("malformed input: {0}")]
    Format(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

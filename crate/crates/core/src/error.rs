use thiserror::Error;

/// Errors raised while building, validating or measuring states.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix contains a non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("subsystem dims {dims:?} multiply to {product}, matrix dimension is {dim}")]
    DimsMismatch {
        dims: Vec<usize>,
        product: usize,
        dim: usize,
    },

    #[error("matrix is not Hermitian (max deviation {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("trace is {trace} (expected 1)")]
    TraceNotOne { trace: f64 },

    #[error("matrix is not positive semidefinite (eigenvalue {eigenvalue})")]
    NotPositive { eigenvalue: f64 },

    #[error("state is not pure (purity {purity})")]
    NotPure { purity: f64 },

    #[error("invalid subsystem selection: {0}")]
    InvalidSubsystems(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unknown {what}: {name}")]
    Unknown { what: &'static str, name: String },

    #[error("channel is not valid: {0}")]
    InvalidChannel(String),

    #[error("eigensolver did not converge (off-diagonal norm {residual:e})")]
    NoConvergence { residual: f64 },

    #[error("malformed state file: {0}")]
    Parse(String),

    #[error("cannot read {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

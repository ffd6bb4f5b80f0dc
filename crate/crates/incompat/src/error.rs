use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimMismatch { expected: usize, got: usize },

    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is not Hermitian: defect {defect:.3e} exceeds tolerance {tol:.1e}")]
    NotHermitian { defect: f64, tol: f64 },

    #[error("effect is not positive semidefinite: min eigenvalue {min_eig:.3e}")]
    NotPositive { min_eig: f64 },

    #[error("effects do not sum to identity: defect {defect:.3e}")]
    NotNormalized { defect: f64 },

    #[error("not a density matrix: {0}")]
    InvalidState(String),

    #[error("channel is not unital: defect {defect:.3e}")]
    NotUnital { defect: f64 },

    #[error("matrix is not unitary: defect {defect:.3e}")]
    NotUnitary { defect: f64 },

    #[error("outcome labels do not match: {0}")]
    LabelMismatch(String),

    #[error("kernel is not stochastic: {0}")]
    NotStochastic(String),

    #[error("parameter out of range: {0}")]
    OutOfRange(String),

    #[error("{what} {needed} exceeds cap {cap}")]
    ResourceCap {
        what: &'static str,
        needed: usize,
        cap: usize,
    },

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

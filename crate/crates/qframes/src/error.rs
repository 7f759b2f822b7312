use thiserror::Error;

/// Errors produced by the quaternionic linear algebra and frame routines.
#[derive(Debug, Error)]
pub enum QError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("division by quaternion with modulus below 1e-300")]
    DivisionByZero,

    #[error("complex matrix is not in the image of the quaternionic embedding: {0}")]
    StructureError(String),

    #[error("eigenvalues of the embedded matrix cannot be grouped into pairs: {0}")]
    PairingError(String),

    #[error("matrix rank {found} does not match expected rank {expected}")]
    RankError { expected: usize, found: usize },

    #[error("matrix has negative eigenvalue {0}")]
    NegativeEigenvalue(f64),

    #[error("(lambda, r) is not admissible: {0}")]
    NotAdmissible(String),

    #[error("Gram-Schmidt pivot norm fell below 1e-12 after {0} resampling attempts")]
    DegenerateDraw(usize),

    #[error("hull oracle limited to N <= 8, got N = {0}")]
    SizeError(usize),

    #[error("endpoint frames lie in different strata: {0}")]
    SpectrumMismatch(String),

    #[error("path heuristic exhausted its restart budget ({restarts} restarts); this does not refute path-connectedness, only this search")]
    PathNotFound { restarts: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, QError>;

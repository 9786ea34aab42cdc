//! Error type shared by all solvers and parsers.

use thiserror::Error;

#[derive(Debug, Clone, Error)]
pub enum UniFactorError {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: String, found: String },

    #[error("matrix is not symmetric: max |a_ij - a_ji| = {max_asymmetry:.3e} exceeds {tolerance:.3e}")]
    AsymmetricInput { max_asymmetry: f64, tolerance: f64 },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("eigendecomposition did not converge within {sweeps} sweeps")]
    IterationFailure { sweeps: usize },

    #[error("negative spectrum: eigenvalue {value:.6e} below tolerance")]
    NegativeSpectrum { value: f64 },

    #[error("rank deficiency: {0}")]
    RankDeficient(String),

    #[error("degenerate data: {0}")]
    DegenerateData(String),

    #[error("singular model: {0}")]
    SingularModel(String),

    #[error("infeasible start point for direct search")]
    InfeasibleStart,

    #[error("degenerate basis: eigenvalue {q}-th of the implied covariance fell below the rank tolerance")]
    DegenerateBasis { q: usize },
}

pub type Result<T> = std::result::Result<T, UniFactorError>;

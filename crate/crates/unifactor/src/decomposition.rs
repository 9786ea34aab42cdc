//! A fitted covariance split Σ ≈ T + V with T = A·Aᵀ low rank.

use crate::eigen::{is_psd, DEFAULT_PSD_TOL};
use crate::error::{Result, UniFactorError};
use crate::matrix::{Matrix, SymmetricMatrix};

/// Low-rank-plus-residual pair produced by the solvers. When a loading matrix
/// is present it satisfies T = A·Aᵀ to 1e-10; both parts are nonnegative
/// definite within the crate-wide PSD tolerance.
#[derive(Debug, Clone)]
pub struct Decomposition {
    loading: Option<Matrix>,
    low_rank: SymmetricMatrix,
    residual: SymmetricMatrix,
    rank: usize,
}

impl Decomposition {
    pub fn new(
        loading: Option<Matrix>,
        low_rank: SymmetricMatrix,
        residual: SymmetricMatrix,
        rank: usize,
    ) -> Result<Self> {
        let p = low_rank.dim();
        if residual.dim() != p {
            return Err(UniFactorError::DimensionMismatch {
                expected: format!("{p}x{p} residual"),
                found: format!("{}x{}", residual.dim(), residual.dim()),
            });
        }
        if rank == 0 || rank > p {
            return Err(UniFactorError::InvalidInput(format!(
                "rank {rank} out of range for dimension {p}"
            )));
        }
        if let Some(a) = &loading {
            if a.rows() != p || a.cols() != rank {
                return Err(UniFactorError::DimensionMismatch {
                    expected: format!("{p}x{rank} loading"),
                    found: format!("{}x{}", a.rows(), a.cols()),
                });
            }
            let outer = SymmetricMatrix::from_loading(a);
            let err = outer.max_abs_diff(&low_rank);
            if err > 1e-10 * low_rank.max_abs().max(1.0) {
                return Err(UniFactorError::InvalidInput(format!(
                    "loading does not reproduce the low-rank part: max deviation {err:.3e}"
                )));
            }
        }
        if !is_psd(&low_rank, DEFAULT_PSD_TOL) {
            return Err(UniFactorError::InvalidInput(
                "low-rank part is not nonnegative definite".into(),
            ));
        }
        if !is_psd(&residual, DEFAULT_PSD_TOL) {
            return Err(UniFactorError::InvalidInput(
                "residual part is not nonnegative definite".into(),
            ));
        }
        Ok(Decomposition {
            loading,
            low_rank,
            residual,
            rank,
        })
    }

    pub fn loading(&self) -> Option<&Matrix> {
        self.loading.as_ref()
    }

    pub fn low_rank(&self) -> &SymmetricMatrix {
        &self.low_rank
    }

    pub fn residual(&self) -> &SymmetricMatrix {
        &self.residual
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn dim(&self) -> usize {
        self.low_rank.dim()
    }

    /// T + V.
    pub fn implied_covariance(&self) -> SymmetricMatrix {
        self.low_rank.add(&self.residual)
    }
}

//! Exact low-rank covariance approximation by truncated eigendecomposition.

use crate::decomposition::Decomposition;
use crate::eigen::{cumulative_proportion, eigendecompose, EigenSystem, DEFAULT_RANK_TOL};
use crate::error::{Result, UniFactorError};
use crate::matrix::{Matrix, SymmetricMatrix};

/// Proportion above which a q-component summary counts as representative.
pub const WELL_REPRESENTED_PROPORTION: f64 = 0.85;

/// Exact solution of the low-rank approximation problem plus a degeneracy
/// flag. `rank_collapse` is set when the q-th eigenvalue sits below the rank
/// tolerance, in which case the numeric rank of T falls short of q.
#[derive(Debug, Clone)]
pub struct PcaSolution {
    pub decomposition: Decomposition,
    pub rank_collapse: bool,
}

/// T = R₁Λ₁R₁ᵀ from the top-q eigenpairs, V = Σ − T, loading A = R₁Λ₁^{1/2}.
///
/// With a degenerate spectrum (λ_q = λ_{q+1}) the deterministic eigendecomposition
/// ordering picks one minimizer among many.
pub fn solve_pca(sigma: &SymmetricMatrix, q: usize) -> Result<PcaSolution> {
    let p = sigma.dim();
    if q < 1 || q >= p {
        return Err(UniFactorError::InvalidInput(format!(
            "q = {q} outside 1..{p}"
        )));
    }
    let eig = eigendecompose(sigma)?;
    let floor = -crate::eigen::DEFAULT_PSD_TOL * eig.values()[0].max(1.0);
    if eig.values()[p - 1] < floor {
        return Err(UniFactorError::NegativeSpectrum {
            value: eig.values()[p - 1],
        });
    }

    let (loading, low_rank) = truncate_top_q(&eig, q);
    let residual = sigma.sub(&low_rank);
    let rank_collapse = eig.values()[q - 1] <= DEFAULT_RANK_TOL * eig.values()[0].max(1.0);
    let decomposition = Decomposition::new(Some(loading), low_rank, residual, q)?;
    Ok(PcaSolution {
        decomposition,
        rank_collapse,
    })
}

/// Top-q truncation of an eigensystem with negative eigenvalues clamped to
/// zero. Returns the loading R₁Λ₁^{1/2} and T = R₁Λ₁R₁ᵀ.
pub(crate) fn truncate_top_q(eig: &EigenSystem, q: usize) -> (Matrix, SymmetricMatrix) {
    let p = eig.dim();
    let mut loading = Matrix::zeros(p, q);
    for k in 0..q {
        let lam = eig.values()[k].max(0.0);
        let sqrt = lam.sqrt();
        for i in 0..p {
            loading.set(i, k, eig.vectors().get(i, k) * sqrt);
        }
    }
    let low_rank = SymmetricMatrix::from_loading(&loading);
    (loading, low_rank)
}

/// PCA solution together with the variance summary used for reporting.
#[derive(Debug, Clone)]
pub struct PcaReport {
    pub solution: PcaSolution,
    pub cumulative_proportion: f64,
    /// All p component variances (the eigenvalues, descending).
    pub component_variances: Vec<f64>,
    pub well_represented: bool,
}

pub fn pca_report(sigma: &SymmetricMatrix, q: usize) -> Result<PcaReport> {
    let solution = solve_pca(sigma, q)?;
    let eig = eigendecompose(sigma)?;
    let proportion = cumulative_proportion(&eig, q)?;
    Ok(PcaReport {
        solution,
        cumulative_proportion: proportion,
        component_variances: eig.values().to_vec(),
        well_represented: proportion >= WELL_REPRESENTED_PROPORTION,
    })
}

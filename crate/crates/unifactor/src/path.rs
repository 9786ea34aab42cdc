//! Homotopy between the low-rank approximation and factor-analysis losses.
//!
//! The blended objective w·‖Σ−T‖_F² + (1−w)·f₂(Σ−T) is solved over a
//! decreasing weight grid. At w = 1 the exact truncation solves the problem;
//! every later point runs the unidirectional search on the loading
//! parametrization under the constraint AAᵀ ≤ Σ, warm-started at the
//! previous point's loading.
//!
//! At the exact truncation the residual Σ − AAᵀ sits on the boundary of the
//! positive semidefinite cone, where no single-coordinate move of A is
//! feasible. The warm start for the first searched point therefore shrinks
//! a boundary loading slightly toward the interior before searching.

use crate::error::{Result, UniFactorError};
use crate::matrix::SymmetricMatrix;
use crate::eigen::{eigendecompose, is_psd, DEFAULT_PSD_TOL};
use crate::objective::{eval_f_tau, eval_path_loss};
use crate::pca::solve_pca;
use crate::search::{
    delinearize_loading, linearize_loading, unidirectional_search, SearchProblem, SearchSettings,
};

#[derive(Debug, Clone)]
pub struct PathConfig {
    /// Strictly decreasing weights from exactly 1 to exactly 0.
    pub grid: Vec<f64>,
    pub q: usize,
    pub search: Option<SearchSettings>,
    /// Relative shrink applied to a boundary warm start.
    pub boundary_nudge: f64,
}

impl PathConfig {
    pub const DEFAULT_NUDGE: f64 = 1e-2;

    /// Uniform grid with m steps: 1, 1 − 1/m, …, 0.
    pub fn uniform(q: usize, m: usize) -> Self {
        assert!(m >= 1);
        let grid = (0..=m)
            .map(|k| if k == m { 0.0 } else { 1.0 - k as f64 / m as f64 })
            .collect();
        PathConfig {
            grid,
            q,
            search: None,
            boundary_nudge: Self::DEFAULT_NUDGE,
        }
    }

    fn validate(&self, p: usize) -> Result<()> {
        if self.q < 1 || self.q >= p {
            return Err(UniFactorError::InvalidInput(format!(
                "q = {} outside 1..{p}",
                self.q
            )));
        }
        let g = &self.grid;
        if g.len() < 2 || g[0] != 1.0 || *g.last().unwrap() != 0.0 {
            return Err(UniFactorError::InvalidInput(
                "weight grid must run from exactly 1 to exactly 0".into(),
            ));
        }
        if g.windows(2).any(|w| w[1] >= w[0]) {
            return Err(UniFactorError::InvalidInput(
                "weight grid must be strictly decreasing".into(),
            ));
        }
        Ok(())
    }
}

/// One solved point of the path. `combined` equals
/// w·pca_loss + (1−w)·fa_loss by construction.
#[derive(Debug, Clone)]
pub struct PathPoint {
    pub w: f64,
    pub t: SymmetricMatrix,
    pub pca_loss: f64,
    pub fa_loss: f64,
    pub combined: f64,
}

pub fn solve_path(sigma: &SymmetricMatrix, config: &PathConfig) -> Result<Vec<PathPoint>> {
    let p = sigma.dim();
    config.validate(p)?;
    let q = config.q;
    let settings = config
        .search
        .unwrap_or_else(|| SearchSettings::scaled_to(sigma));

    let pca = solve_pca(sigma, q)?;
    let mut loading = linearize_loading(
        pca.decomposition
            .loading()
            .expect("pca always carries a loading"),
    );
    let mut points = Vec::with_capacity(config.grid.len());
    points.push(make_point(sigma, pca.decomposition.low_rank().clone(), 1.0));

    for &w in &config.grid[1..] {
        let start = nudged_start(sigma, &loading, p, q, config.boundary_nudge);
        let sig_obj = sigma.clone();
        let sig_feas = sigma.clone();
        let problem = SearchProblem {
            objective: move |x: &[f64]| {
                let a = delinearize_loading(x, p, q).expect("length fixed");
                eval_path_loss(&SymmetricMatrix::from_loading(&a), &sig_obj, w)
            },
            feasible: move |x: &[f64]| {
                let a = delinearize_loading(x, p, q).expect("length fixed");
                is_psd(
                    &sig_feas.sub(&SymmetricMatrix::from_loading(&a)),
                    DEFAULT_PSD_TOL,
                )
            },
            initial: start,
            settings,
        };
        let out = unidirectional_search(&problem)?;
        loading = out.solution;
        let a = delinearize_loading(&loading, p, q)?;
        points.push(make_point(sigma, SymmetricMatrix::from_loading(&a), w));
    }
    Ok(points)
}

fn make_point(sigma: &SymmetricMatrix, t: SymmetricMatrix, w: f64) -> PathPoint {
    let resid = sigma.sub(&t);
    let fro = resid.frobenius_norm();
    let pca_loss = fro * fro;
    let fa_loss = eval_f_tau(&resid, 2.0);
    PathPoint {
        w,
        t,
        pca_loss,
        fa_loss,
        combined: w * pca_loss + (1.0 - w) * fa_loss,
    }
}

/// Shrinks the warm start toward the interior when its residual touches the
/// PSD boundary; interior starts pass through unchanged.
fn nudged_start(
    sigma: &SymmetricMatrix,
    loading: &[f64],
    p: usize,
    q: usize,
    nudge: f64,
) -> Vec<f64> {
    let a = delinearize_loading(loading, p, q).expect("length fixed");
    let resid = sigma.sub(&SymmetricMatrix::from_loading(&a));
    let eig = eigendecompose(&resid).expect("jacobi sweep budget exhausted");
    let min = eig.values()[p - 1];
    let scale = eig.values()[0].max(1.0);
    if min <= DEFAULT_PSD_TOL * scale {
        loading.iter().map(|x| x * (1.0 - nudge)).collect()
    } else {
        loading.to_vec()
    }
}

/// CSV with header `w,pca_loss,fa_loss,combined`, one row per point at full
/// round-trip precision.
pub fn emit_path_csv(points: &[PathPoint]) -> String {
    let mut s = String::from("w,pca_loss,fa_loss,combined\n");
    for pt in points {
        s.push_str(&format!(
            "{},{},{},{}\n",
            pt.w, pt.pca_loss, pt.fa_loss, pt.combined
        ));
    }
    s
}

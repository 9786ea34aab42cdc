//! Factor-analysis estimation.
//!
//! Least squares and penalized least squares run a two-block coordinate
//! descent: the low-rank block is the clamped top-q truncation of Σ − V, the
//! diagonal block is diag(Σ − T)/(1 + λ) clamped at zero. Both updates are
//! exact block minimizers, so the penalized squared loss is non-increasing.
//!
//! Maximum likelihood minimizes log|AAᵀ + diag(v)| + trace((AAᵀ + diag(v))⁻¹Σ)
//! over the joint vector (A row-major, then v) with the unidirectional search,
//! keeping v ≥ 0 and the model covariance positive definite.

use crate::decomposition::Decomposition;
use crate::eigen::{eigendecompose, loewner_leq, DEFAULT_PSD_TOL};
use crate::error::{Result, UniFactorError};
use crate::matrix::{Matrix, SymmetricMatrix};
use crate::objective::{eval_pls, neg_loglik_of_model, PD_TOL};
use crate::pca::{solve_pca, truncate_top_q};
use crate::report::FitReport;
use crate::search::{
    delinearize_loading, linearize_loading, unidirectional_search, SearchProblem, SearchSettings,
};

/// Settings for the coordinate-descent fits. `eps` is the threshold on the
/// per-iteration decrease of the (non-squared) Frobenius fit distance.
#[derive(Debug, Clone)]
pub struct FaFitConfig {
    pub q: usize,
    pub lambda: f64,
    pub eps: f64,
    pub max_iters: usize,
    /// Initial diagonal of V; zero when absent.
    pub v0: Option<Vec<f64>>,
}

impl FaFitConfig {
    pub const DEFAULT_EPS: f64 = 1e-10;
    pub const DEFAULT_MAX_ITERS: usize = 10_000;

    pub fn new(q: usize) -> Self {
        FaFitConfig {
            q,
            lambda: 0.0,
            eps: Self::DEFAULT_EPS,
            max_iters: Self::DEFAULT_MAX_ITERS,
            v0: None,
        }
    }

    pub fn with_lambda(mut self, lambda: f64) -> Self {
        self.lambda = lambda;
        self
    }

    fn validate(&self, sigma: &SymmetricMatrix) -> Result<Vec<f64>> {
        let p = sigma.dim();
        if self.q < 1 || self.q >= p {
            return Err(UniFactorError::InvalidInput(format!(
                "q = {} outside 1..{p}",
                self.q
            )));
        }
        if self.lambda < 0.0 || !self.eps.is_finite() || self.eps <= 0.0 {
            return Err(UniFactorError::InvalidInput(
                "need lambda >= 0 and eps > 0".into(),
            ));
        }
        match &self.v0 {
            None => Ok(vec![0.0; p]),
            Some(v) => {
                if v.len() != p {
                    return Err(UniFactorError::DimensionMismatch {
                        expected: format!("{p} diagonal entries"),
                        found: format!("{}", v.len()),
                    });
                }
                if v.iter().any(|x| *x < 0.0) {
                    return Err(UniFactorError::InvalidInput(
                        "initial V must be nonnegative".into(),
                    ));
                }
                let v0 = SymmetricMatrix::diagonal(v);
                if !loewner_leq(&v0, sigma, DEFAULT_PSD_TOL)? {
                    return Err(UniFactorError::InvalidInput(
                        "initial V must satisfy V <= Sigma".into(),
                    ));
                }
                Ok(v.clone())
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct FaFit {
    pub decomposition: Decomposition,
    pub report: FitReport,
}

/// Least squares fit (λ = 0 coordinate descent).
pub fn fit_fa_ls(sigma: &SymmetricMatrix, config: &FaFitConfig) -> Result<FaFit> {
    if config.lambda != 0.0 {
        return Err(UniFactorError::InvalidInput(
            "least squares fit requires lambda = 0".into(),
        ));
    }
    coordinate_descent(sigma, config)
}

/// Penalized least squares fit (λ > 0 coordinate descent with shrunken
/// diagonal updates).
pub fn fit_fa_pls(sigma: &SymmetricMatrix, config: &FaFitConfig) -> Result<FaFit> {
    if config.lambda <= 0.0 {
        return Err(UniFactorError::InvalidInput(
            "penalized least squares requires lambda > 0".into(),
        ));
    }
    coordinate_descent(sigma, config)
}

fn coordinate_descent(sigma: &SymmetricMatrix, config: &FaFitConfig) -> Result<FaFit> {
    let v_init = config.validate(sigma)?;
    let (q, lambda) = (config.q, config.lambda);

    let mut v = v_init;
    let mut loading;
    let mut t;
    let mut trace = Vec::new();
    let mut converged = false;
    let mut iterations = 0;

    // first T-step, recorded as iteration 0 of the trace
    let eig = eigendecompose(&sigma.sub(&SymmetricMatrix::diagonal(&v)))?;
    let (a0, t0) = truncate_top_q(&eig, q);
    loading = a0;
    t = t0;
    let mut fit_dist_prev;
    {
        let v_new = diag_step(sigma, &t, lambda);
        v = v_new;
        fit_dist_prev = fit_distance(sigma, &t, &v);
        trace.push(penalized_loss(sigma, &t, &v, lambda));
    }

    for k in 1..config.max_iters {
        let eig = eigendecompose(&sigma.sub(&SymmetricMatrix::diagonal(&v)))?;
        let (a_new, t_new) = truncate_top_q(&eig, q);
        let v_new = diag_step(sigma, &t_new, lambda);
        loading = a_new;
        t = t_new;
        v = v_new;
        trace.push(penalized_loss(sigma, &t, &v, lambda));
        iterations = k;

        let fit_dist = fit_distance(sigma, &t, &v);
        if fit_dist_prev - fit_dist < config.eps {
            converged = true;
            break;
        }
        fit_dist_prev = fit_dist;
    }

    let residual = SymmetricMatrix::diagonal(&v);
    let decomposition = Decomposition::new(Some(loading), t, residual, q)?;
    Ok(FaFit {
        decomposition,
        report: FitReport {
            objective_trace: trace,
            iterations: iterations + 1,
            converged,
            terminal_step: config.eps,
        },
    })
}

/// diag(Σ − T)/(1 + λ) with negative entries clamped to zero.
fn diag_step(sigma: &SymmetricMatrix, t: &SymmetricMatrix, lambda: f64) -> Vec<f64> {
    sigma
        .sub(t)
        .diagonal_entries()
        .iter()
        .map(|d| (d / (1.0 + lambda)).max(0.0))
        .collect()
}

fn fit_distance(sigma: &SymmetricMatrix, t: &SymmetricMatrix, v: &[f64]) -> f64 {
    sigma
        .sub(t)
        .sub(&SymmetricMatrix::diagonal(v))
        .frobenius_norm()
}

fn penalized_loss(sigma: &SymmetricMatrix, t: &SymmetricMatrix, v: &[f64], lambda: f64) -> f64 {
    eval_pls(t, &SymmetricMatrix::diagonal(v), sigma, lambda)
}

/// Maximum likelihood fit over the joint (loading, diagonal) parameter
/// vector. The start point is the top-q truncation of Σ with the residual
/// diagonal, floored to keep the model covariance positive definite.
pub fn fit_fa_ml(
    sigma: &SymmetricMatrix,
    q: usize,
    settings: Option<SearchSettings>,
) -> Result<FaFit> {
    let p = sigma.dim();
    if q < 1 || q >= p {
        return Err(UniFactorError::InvalidInput(format!("q = {q} outside 1..{p}")));
    }
    let settings = settings.unwrap_or_else(|| SearchSettings::scaled_to(sigma));

    let pca = solve_pca(sigma, q)?;
    let a0 = pca.decomposition.loading().expect("pca always carries a loading");
    let mut v0: Vec<f64> = pca
        .decomposition
        .residual()
        .diagonal_entries()
        .iter()
        .map(|d| d.max(0.0))
        .collect();

    let model_ok = |a: &Matrix, v: &[f64]| -> bool {
        let m = SymmetricMatrix::from_loading(a)
            .add(&SymmetricMatrix::diagonal(v));
        let eig = eigendecompose(&m).expect("jacobi sweep budget exhausted");
        let max = eig.values()[0];
        eig.values()[p - 1] > PD_TOL * max.abs().max(1.0)
    };

    // floor the diagonal until the start is positive definite
    let mut floor = 1e-6 * sigma.max_diagonal().max(1.0);
    let mut attempts = 0;
    while !model_ok(a0, &v0) {
        for x in v0.iter_mut() {
            *x = x.max(floor);
        }
        floor *= 10.0;
        attempts += 1;
        if attempts > 12 {
            return Err(UniFactorError::SingularModel(
                "no positive definite start for the likelihood fit".into(),
            ));
        }
    }

    let mut initial = linearize_loading(a0);
    initial.extend_from_slice(&v0);

    let sig_obj = sigma.clone();
    let problem = SearchProblem {
        objective: move |x: &[f64]| {
            let a = delinearize_loading(&x[..p * q], p, q).expect("length fixed");
            let m = SymmetricMatrix::from_loading(&a)
                .add(&SymmetricMatrix::diagonal(&x[p * q..]));
            neg_loglik_of_model(&m, &sig_obj).unwrap_or(f64::INFINITY)
        },
        feasible: move |x: &[f64]| {
            if x[p * q..].iter().any(|v| *v < 0.0) {
                return false;
            }
            let a = delinearize_loading(&x[..p * q], p, q).expect("length fixed");
            let m = SymmetricMatrix::from_loading(&a)
                .add(&SymmetricMatrix::diagonal(&x[p * q..]));
            let eig = eigendecompose(&m).expect("jacobi sweep budget exhausted");
            eig.values()[p - 1] > PD_TOL * eig.values()[0].abs().max(1.0)
        },
        initial,
        settings,
    };
    let out = unidirectional_search(&problem)?;

    let a = delinearize_loading(&out.solution[..p * q], p, q)?;
    let v = SymmetricMatrix::diagonal(&out.solution[p * q..]);
    let t = SymmetricMatrix::from_loading(&a);
    let decomposition = Decomposition::new(Some(a), t, v, q)?;
    Ok(FaFit {
        decomposition,
        report: FitReport {
            objective_trace: out.trace.iterates,
            iterations: out.trace.evaluations,
            converged: !out.trace.budget_exhausted,
            terminal_step: out.trace.final_step,
        },
    })
}

/// One row of the regularization sweep.
#[derive(Debug, Clone)]
pub struct SweepPoint {
    pub lambda: f64,
    pub v_fro: f64,
    pub ls_loss: f64,
}

/// Penalized fits across a λ grid, reporting ‖V‖_F and the unpenalized loss.
pub fn lambda_sweep(
    sigma: &SymmetricMatrix,
    q: usize,
    lambdas: &[f64],
    eps: f64,
    max_iters: usize,
) -> Result<Vec<SweepPoint>> {
    let mut out = Vec::with_capacity(lambdas.len());
    for &lambda in lambdas {
        let config = FaFitConfig {
            q,
            lambda,
            eps,
            max_iters,
            v0: None,
        };
        let fit = if lambda == 0.0 {
            fit_fa_ls(sigma, &config)?
        } else {
            fit_fa_pls(sigma, &config)?
        };
        let v_fro = fit.decomposition.residual().frobenius_norm();
        let r = sigma
            .sub(fit.decomposition.low_rank())
            .sub(fit.decomposition.residual());
        let n = r.frobenius_norm();
        out.push(SweepPoint {
            lambda,
            v_fro,
            ls_loss: n * n,
        });
    }
    Ok(out)
}

/// CSV with header `lambda,v_fro,ls_loss`, one row per sweep point.
pub fn emit_sweep_csv(points: &[SweepPoint]) -> String {
    let mut s = String::from("lambda,v_fro,ls_loss\n");
    for p in points {
        s.push_str(&format!("{},{},{}\n", p.lambda, p.v_fro, p.ls_loss));
    }
    s
}

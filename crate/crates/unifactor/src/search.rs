//! Derivative-free unidirectional (coordinate pattern) search.
//!
//! Each round perturbs every coordinate by ±s, keeps the feasible candidates
//! that strictly improve the objective, and accepts the best of them; when no
//! candidate qualifies the step is halved. The search stops once s falls
//! below the threshold or the evaluation budget runs out.
//!
//! Determinism: candidates are scanned coordinate-by-coordinate with +s
//! before −s, and ties go to the earliest candidate in that order, so
//! identical inputs always produce identical traces.

use crate::error::{Result, UniFactorError};
use crate::matrix::{Matrix, SymmetricMatrix};

/// Step sizing and budget for the search.
#[derive(Debug, Clone, Copy)]
pub struct SearchSettings {
    /// Initial step s.
    pub step0: f64,
    /// Stop once the step falls below this.
    pub eps: f64,
    /// Objective evaluation budget.
    pub max_evals: usize,
}

impl SearchSettings {
    pub const DEFAULT_EPS: f64 = 1e-6;
    pub const DEFAULT_MAX_EVALS: usize = 200_000;

    /// Scale-aware defaults: step0 = 0.1·sqrt(max diagonal of Σ).
    pub fn scaled_to(sigma: &SymmetricMatrix) -> Self {
        let scale = sigma.max_diagonal().max(0.0).sqrt();
        SearchSettings {
            step0: 0.1 * scale.max(1e-3),
            eps: Self::DEFAULT_EPS,
            max_evals: Self::DEFAULT_MAX_EVALS,
        }
    }
}

/// A box-free minimization problem over a real parameter vector.
pub struct SearchProblem<F, G>
where
    F: Fn(&[f64]) -> f64,
    G: Fn(&[f64]) -> bool,
{
    pub objective: F,
    pub feasible: G,
    pub initial: Vec<f64>,
    pub settings: SearchSettings,
}

/// Objective values along the accepted sequence (the start value first),
/// plus step and budget bookkeeping.
#[derive(Debug, Clone)]
pub struct SearchTrace {
    pub iterates: Vec<f64>,
    pub final_step: f64,
    pub evaluations: usize,
    pub budget_exhausted: bool,
}

#[derive(Debug, Clone)]
pub struct SearchOutcome {
    pub solution: Vec<f64>,
    pub objective: f64,
    pub trace: SearchTrace,
}

pub fn unidirectional_search<F, G>(problem: &SearchProblem<F, G>) -> Result<SearchOutcome>
where
    F: Fn(&[f64]) -> f64,
    G: Fn(&[f64]) -> bool,
{
    let settings = &problem.settings;
    if !settings.step0.is_finite()
        || !settings.eps.is_finite()
        || settings.eps <= 0.0
        || settings.step0 <= settings.eps
    {
        return Err(UniFactorError::InvalidInput(
            "search needs step0 > eps > 0".into(),
        ));
    }
    if !(problem.feasible)(&problem.initial) {
        return Err(UniFactorError::InfeasibleStart);
    }

    let dim = problem.initial.len();
    let mut x = problem.initial.clone();
    let mut fx = (problem.objective)(&x);
    let mut evaluations = 1usize;
    let mut step = settings.step0;
    let mut iterates = vec![fx];
    let mut budget_exhausted = false;

    'outer: while step >= settings.eps {
        let mut best: Option<(Vec<f64>, f64)> = None;
        for i in 0..dim {
            for delta in [step, -step] {
                if evaluations >= settings.max_evals {
                    budget_exhausted = true;
                    break 'outer;
                }
                let mut cand = x.clone();
                cand[i] += delta;
                if !(problem.feasible)(&cand) {
                    continue;
                }
                let fc = (problem.objective)(&cand);
                evaluations += 1;
                let improves_current = fc < fx;
                let beats_best = best.as_ref().is_none_or(|(_, fb)| fc < *fb);
                if improves_current && beats_best {
                    best = Some((cand, fc));
                }
            }
        }
        match best {
            None => step *= 0.5,
            Some((cand, fc)) => {
                x = cand;
                fx = fc;
                iterates.push(fx);
            }
        }
    }

    Ok(SearchOutcome {
        solution: x,
        objective: fx,
        trace: SearchTrace {
            iterates,
            final_step: step,
            evaluations,
            budget_exhausted,
        },
    })
}

/// Row-major flattening of a p×q loading matrix.
pub fn linearize_loading(a: &Matrix) -> Vec<f64> {
    let mut out = Vec::with_capacity(a.rows() * a.cols());
    for i in 0..a.rows() {
        for j in 0..a.cols() {
            out.push(a.get(i, j));
        }
    }
    out
}

/// Inverse of [`linearize_loading`].
pub fn delinearize_loading(v: &[f64], p: usize, q: usize) -> Result<Matrix> {
    if v.len() != p * q {
        return Err(UniFactorError::DimensionMismatch {
            expected: format!("{} parameters", p * q),
            found: format!("{}", v.len()),
        });
    }
    let mut m = Matrix::zeros(p, q);
    for i in 0..p {
        for j in 0..q {
            m.set(i, j, v[i * q + j]);
        }
    }
    Ok(m)
}

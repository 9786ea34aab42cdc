//! Loss functions over symmetric matrices and (T, V) pairs.
//!
//! One-matrix losses are evaluated on the residual S = Σ − T; two-matrix
//! losses take the pair directly. All evaluations are derivative-free by
//! design — the solvers never differentiate these.

use crate::eigen::{eigendecompose, numeric_rank, DEFAULT_RANK_TOL};
use crate::error::{Result, UniFactorError};
use crate::matrix::{Matrix, SymmetricMatrix};

/// Threshold below which an entry counts as zero for the counting losses.
pub const ZERO_ENTRY_TOL: f64 = 1e-8;

/// Relative PD floor for the likelihood: T+V must have smallest eigenvalue
/// above `PD_TOL * max(1, largest eigenvalue)`.
pub const PD_TOL: f64 = 1e-12;

/// The elementary losses of the low-rank approximation problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ElementaryLoss {
    Trace,
    Spectral,
    Frobenius,
    Rank,
}

/// Base norm for the off-diagonal-excess loss. Trace is excluded: its
/// off-diagonal excess is identically zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OffDiagBase {
    Spectral,
    Frobenius,
}

/// Base loss for the f-penalized likelihood.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PenaltyBase {
    Trace,
    Spectral,
    Frobenius,
}

pub fn eval_elementary(f: ElementaryLoss, s: &SymmetricMatrix) -> f64 {
    match f {
        ElementaryLoss::Trace => s.trace(),
        ElementaryLoss::Spectral => spectral_norm(s),
        ElementaryLoss::Frobenius => s.frobenius_norm(),
        ElementaryLoss::Rank => numeric_rank(s, DEFAULT_RANK_TOL) as f64,
    }
}

fn spectral_norm(s: &SymmetricMatrix) -> f64 {
    eigendecompose(s)
        .expect("jacobi sweep budget exhausted")
        .spectral_norm()
}

/// Entry-count loss with a determinant branch: 0 for the zero matrix, p for a
/// singular nonzero matrix, otherwise the number of entries above `zero_tol`.
/// Singularity means log|det| below log(1e-10) + p·log(1 + ‖S‖_F).
pub fn eval_modified_l0(s: &SymmetricMatrix, zero_tol: f64) -> f64 {
    let p = s.dim();
    let nonzero = s
        .as_slice()
        .iter()
        .filter(|x| x.abs() > zero_tol)
        .count();
    if nonzero == 0 {
        return 0.0;
    }
    let eig = eigendecompose(s).expect("jacobi sweep budget exhausted");
    let log_abs_det: f64 = eig.values().iter().map(|x| x.abs().ln()).sum();
    let log_det_tol = 1e-10_f64.ln() + (p as f64) * (1.0 + s.frobenius_norm()).ln();
    if log_abs_det <= log_det_tol {
        p as f64
    } else {
        nonzero as f64
    }
}

/// Σ_{i<j} |s_ij|^τ with the convention |0|⁰ = 0 (entries at or below the
/// zero threshold contribute nothing when τ = 0).
pub fn eval_f_tau(s: &SymmetricMatrix, tau: f64) -> f64 {
    assert!(tau >= 0.0, "tau must be nonnegative");
    let p = s.dim();
    let mut total = 0.0;
    for i in 0..p {
        for j in (i + 1)..p {
            let x = s.get(i, j).abs();
            if tau == 0.0 {
                if x > ZERO_ENTRY_TOL {
                    total += 1.0;
                }
            } else {
                total += x.powf(tau);
            }
        }
    }
    total
}

/// f(S) − f(diag(S)) for a base norm dominating its diagonal part.
pub fn eval_f_offdiag(s: &SymmetricMatrix, base: OffDiagBase) -> f64 {
    let diag = SymmetricMatrix::diagonal(&s.diagonal_entries());
    match base {
        OffDiagBase::Spectral => spectral_norm(s) - spectral_norm(&diag),
        OffDiagBase::Frobenius => s.frobenius_norm() - diag.frobenius_norm(),
    }
}

/// log|T+V| + trace((T+V)⁻¹ Σ), the negative log-likelihood up to a constant.
pub fn eval_neg_loglik(
    t: &SymmetricMatrix,
    v: &SymmetricMatrix,
    sigma: &SymmetricMatrix,
) -> Result<f64> {
    let m = t.add(v);
    neg_loglik_of_model(&m, sigma)
}

/// Likelihood evaluated directly on the model covariance M = T + V.
pub fn neg_loglik_of_model(m: &SymmetricMatrix, sigma: &SymmetricMatrix) -> Result<f64> {
    if m.dim() != sigma.dim() {
        return Err(UniFactorError::DimensionMismatch {
            expected: format!("{0}x{0}", sigma.dim()),
            found: format!("{0}x{0}", m.dim()),
        });
    }
    let eig = eigendecompose(m).expect("jacobi sweep budget exhausted");
    let max = eig.values()[0];
    let min = eig.values()[eig.dim() - 1];
    if min <= PD_TOL * max.abs().max(1.0) {
        return Err(UniFactorError::SingularModel(format!(
            "smallest eigenvalue {min:.3e} of T+V is not positive"
        )));
    }
    let log_det: f64 = eig.values().iter().map(|x| x.ln()).sum();
    // trace(M^{-1} Σ) = Σ_k (r_k' Σ r_k) / λ_k
    let mut trace_term = 0.0;
    for k in 0..eig.dim() {
        let rk = eig.vector(k);
        trace_term += sigma.quadratic_form(&rk) / eig.values()[k];
    }
    Ok(log_det + trace_term)
}

/// ‖Σ − (T+V)‖_F².
pub fn eval_ls(t: &SymmetricMatrix, v: &SymmetricMatrix, sigma: &SymmetricMatrix) -> f64 {
    let r = sigma.sub(&t.add(v));
    let n = r.frobenius_norm();
    n * n
}

/// ‖Σ − (T+V)‖_F² + λ‖V‖_F².
pub fn eval_pls(
    t: &SymmetricMatrix,
    v: &SymmetricMatrix,
    sigma: &SymmetricMatrix,
    lambda: f64,
) -> f64 {
    let vn = v.frobenius_norm();
    eval_ls(t, v, sigma) + lambda * vn * vn
}

/// w·‖Σ−T‖_F² + (1−w)·f₂(Σ−T), the blended low-rank loss.
pub fn eval_path_loss(t: &SymmetricMatrix, sigma: &SymmetricMatrix, w: f64) -> f64 {
    assert!((0.0..=1.0).contains(&w), "w must lie in [0, 1]");
    let s = sigma.sub(t);
    let fro = s.frobenius_norm();
    w * fro * fro + (1.0 - w) * eval_f_tau(&s, 2.0)
}

/// trace(Σ + T − 2(Σ^{1/2} T Σ^{1/2})^{1/2}); square roots clamp tolerance-level
/// negative eigenvalues at zero so the map stays defined on the PSD boundary.
pub fn eval_wasserstein(t: &SymmetricMatrix, sigma: &SymmetricMatrix) -> f64 {
    let sqrt_sigma = psd_sqrt(sigma);
    let inner = sqrt_sigma.matmul(&t.to_matrix()).matmul(&sqrt_sigma);
    let p = sigma.dim();
    let mut inner_entries = vec![0.0; p * p];
    for i in 0..p {
        for j in 0..p {
            inner_entries[i * p + j] = inner.get(i, j);
        }
    }
    let inner_sym = SymmetricMatrix::new(p, &inner_entries).expect("square psd product");
    let eig = eigendecompose(&inner_sym).expect("jacobi sweep budget exhausted");
    let cross: f64 = eig.values().iter().map(|x| x.max(0.0).sqrt()).sum();
    sigma.trace() + t.trace() - 2.0 * cross
}

fn psd_sqrt(m: &SymmetricMatrix) -> Matrix {
    let eig = eigendecompose(m).expect("jacobi sweep budget exhausted");
    let p = m.dim();
    let mut out = Matrix::zeros(p, p);
    for i in 0..p {
        for j in 0..p {
            let mut s = 0.0;
            for k in 0..p {
                s += eig.values()[k].max(0.0).sqrt() * eig.vectors().get(i, k)
                    * eig.vectors().get(j, k);
            }
            out.set(i, j, s);
        }
    }
    out
}

/// Closed description of a loss family with its parameters and reference Σ.
#[derive(Debug, Clone)]
pub struct ObjectiveSpec {
    family: ObjectiveFamily,
    sigma: SymmetricMatrix,
}

/// Parameters travel with the family that needs them.
#[derive(Debug, Clone, PartialEq)]
pub enum ObjectiveFamily {
    Trace,
    Spectral,
    Frobenius,
    FrobeniusSq,
    Rank,
    ModifiedL0,
    FTau { tau: f64 },
    FOffdiag { base: OffDiagBase },
    NegLoglik,
    PenalizedMlF { lambda: f64, base: PenaltyBase },
    PenalizedMlV2 { lambda: f64 },
    Ls,
    Pls { lambda: f64 },
    Path { w: f64 },
    Wasserstein,
}

impl ObjectiveSpec {
    pub fn new(family: ObjectiveFamily, sigma: SymmetricMatrix) -> Result<Self> {
        match &family {
            ObjectiveFamily::FTau { tau } if *tau < 0.0 => {
                return Err(UniFactorError::InvalidInput("tau must be >= 0".into()))
            }
            ObjectiveFamily::PenalizedMlF { lambda, .. }
            | ObjectiveFamily::PenalizedMlV2 { lambda }
            | ObjectiveFamily::Pls { lambda }
                if *lambda < 0.0 =>
            {
                return Err(UniFactorError::InvalidInput("lambda must be >= 0".into()))
            }
            ObjectiveFamily::Path { w } if !(0.0..=1.0).contains(w) => {
                return Err(UniFactorError::InvalidInput("w must lie in [0, 1]".into()))
            }
            _ => {}
        }
        Ok(ObjectiveSpec { family, sigma })
    }

    pub fn family(&self) -> &ObjectiveFamily {
        &self.family
    }

    pub fn sigma(&self) -> &SymmetricMatrix {
        &self.sigma
    }

    /// Whether `evaluate` needs a residual matrix V.
    pub fn requires_residual(&self) -> bool {
        matches!(
            self.family,
            ObjectiveFamily::NegLoglik
                | ObjectiveFamily::PenalizedMlF { .. }
                | ObjectiveFamily::PenalizedMlV2 { .. }
                | ObjectiveFamily::Ls
                | ObjectiveFamily::Pls { .. }
        )
    }

    /// Evaluates the loss at T (one-matrix families apply f to Σ − T) or at
    /// the pair (T, V).
    pub fn evaluate(&self, t: &SymmetricMatrix, v: Option<&SymmetricMatrix>) -> Result<f64> {
        if t.dim() != self.sigma.dim() {
            return Err(UniFactorError::DimensionMismatch {
                expected: format!("{0}x{0}", self.sigma.dim()),
                found: format!("{0}x{0}", t.dim()),
            });
        }
        if self.requires_residual() && v.is_none() {
            return Err(UniFactorError::InvalidInput(format!(
                "objective {:?} needs a residual matrix",
                self.family
            )));
        }
        let s = self.sigma.sub(t);
        Ok(match &self.family {
            ObjectiveFamily::Trace => eval_elementary(ElementaryLoss::Trace, &s),
            ObjectiveFamily::Spectral => eval_elementary(ElementaryLoss::Spectral, &s),
            ObjectiveFamily::Frobenius => eval_elementary(ElementaryLoss::Frobenius, &s),
            ObjectiveFamily::FrobeniusSq => {
                let n = s.frobenius_norm();
                n * n
            }
            ObjectiveFamily::Rank => eval_elementary(ElementaryLoss::Rank, &s),
            ObjectiveFamily::ModifiedL0 => eval_modified_l0(&s, ZERO_ENTRY_TOL),
            ObjectiveFamily::FTau { tau } => eval_f_tau(&s, *tau),
            ObjectiveFamily::FOffdiag { base } => eval_f_offdiag(&s, *base),
            ObjectiveFamily::NegLoglik => {
                eval_neg_loglik(t, v.expect("residual checked above"), &self.sigma)?
            }
            ObjectiveFamily::PenalizedMlF { .. } | ObjectiveFamily::PenalizedMlV2 { .. } => {
                eval_penalized(self, t, v.expect("residual checked above"))?
            }
            ObjectiveFamily::Ls => eval_ls(t, v.expect("residual checked above"), &self.sigma),
            ObjectiveFamily::Pls { lambda } => {
                eval_pls(t, v.expect("residual checked above"), &self.sigma, *lambda)
            }
            ObjectiveFamily::Path { w } => eval_path_loss(t, &self.sigma, *w),
            ObjectiveFamily::Wasserstein => eval_wasserstein(t, &self.sigma),
        })
    }
}

/// Penalized likelihood: l(T,V) + λ·f(Σ−T), or l(T,V) + λ‖V‖₂². The given
/// objective must carry one of the two penalized families.
pub fn eval_penalized(
    spec: &ObjectiveSpec,
    t: &SymmetricMatrix,
    v: &SymmetricMatrix,
) -> Result<f64> {
    let base_l = eval_neg_loglik(t, v, spec.sigma())?;
    match spec.family() {
        ObjectiveFamily::PenalizedMlF { lambda, base } => {
            let s = spec.sigma().sub(t);
            let f = match base {
                PenaltyBase::Trace => eval_elementary(ElementaryLoss::Trace, &s),
                PenaltyBase::Spectral => eval_elementary(ElementaryLoss::Spectral, &s),
                PenaltyBase::Frobenius => eval_elementary(ElementaryLoss::Frobenius, &s),
            };
            Ok(base_l + lambda * f)
        }
        ObjectiveFamily::PenalizedMlV2 { lambda } => {
            let v2 = spectral_norm(v);
            Ok(base_l + lambda * v2 * v2)
        }
        other => Err(UniFactorError::InvalidInput(format!(
            "eval_penalized called with non-penalized family {other:?}"
        ))),
    }
}

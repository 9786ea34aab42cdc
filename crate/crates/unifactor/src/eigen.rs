//! Symmetric eigendecomposition and the spectral predicates built on it.
//!
//! The solver is a cyclic Jacobi sweep: rotations are applied in a fixed
//! row-major order over the strict upper triangle until every off-diagonal
//! entry is negligible relative to the input scale. The method is
//! deterministic, which the rest of the crate relies on: identical inputs
//! produce bit-identical eigensystems.
//!
//! Two conventions make fixture comparison stable:
//! - eigenvalues are sorted descending with a stable sort (ties keep the
//!   rotation output order),
//! - each eigenvector is flipped so its entry of largest absolute value is
//!   nonnegative (first such entry wins on ties).

use crate::error::{Result, UniFactorError};
use crate::matrix::{Matrix, SymmetricMatrix};

/// Relative slack used by PSD checks: a matrix counts as nonnegative definite
/// when its smallest eigenvalue is at least `-tol * max(1, largest eigenvalue)`.
pub const DEFAULT_PSD_TOL: f64 = 1e-10;

/// Relative threshold below which an eigenvalue does not count toward rank.
pub const DEFAULT_RANK_TOL: f64 = 1e-8;

const MAX_JACOBI_SWEEPS: usize = 100;

/// Ordered spectrum of a symmetric matrix: `values` descending, `vectors`
/// orthonormal with column k paired to `values[k]`.
#[derive(Debug, Clone)]
pub struct EigenSystem {
    values: Vec<f64>,
    vectors: Matrix,
}

impl EigenSystem {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn vectors(&self) -> &Matrix {
        &self.vectors
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// Column k of the eigenvector matrix.
    pub fn vector(&self, k: usize) -> Vec<f64> {
        self.vectors.column(k)
    }

    /// R · diag(values) · Rᵀ.
    pub fn reconstruct(&self) -> SymmetricMatrix {
        let p = self.dim();
        let mut m = SymmetricMatrix::zeros(p);
        for i in 0..p {
            for j in 0..=i {
                let mut s = 0.0;
                for k in 0..p {
                    s += self.values[k] * self.vectors.get(i, k) * self.vectors.get(j, k);
                }
                m.set_sym(i, j, s);
            }
        }
        m
    }

    /// Largest eigenvalue magnitude.
    pub fn spectral_norm(&self) -> f64 {
        self.values
            .iter()
            .map(|x| x.abs())
            .fold(0.0, f64::max)
    }
}

/// Full eigendecomposition by cyclic Jacobi sweeps.
pub fn eigendecompose(m: &SymmetricMatrix) -> Result<EigenSystem> {
    let p = m.dim();
    let mut a: Vec<f64> = m.as_slice().to_vec();
    let mut v = vec![0.0; p * p];
    for i in 0..p {
        v[i * p + i] = 1.0;
    }

    let scale = m.max_abs().max(1.0);
    let off_tol = 1e-14 * scale;

    let mut converged = p == 1;
    for _ in 0..MAX_JACOBI_SWEEPS {
        if converged {
            break;
        }
        converged = true;
        for i in 0..p {
            for j in (i + 1)..p {
                let aij = a[i * p + j];
                if aij.abs() <= off_tol {
                    continue;
                }
                converged = false;
                rotate(&mut a, &mut v, p, i, j);
            }
        }
    }
    if !converged {
        return Err(UniFactorError::IterationFailure {
            sweeps: MAX_JACOBI_SWEEPS,
        });
    }

    let raw: Vec<f64> = (0..p).map(|i| a[i * p + i]).collect();
    let mut order: Vec<usize> = (0..p).collect();
    // stable: equal eigenvalues keep the rotation output order
    order.sort_by(|&x, &y| raw[y].partial_cmp(&raw[x]).unwrap());

    let values: Vec<f64> = order.iter().map(|&k| raw[k]).collect();
    let mut vectors = Matrix::zeros(p, p);
    for (new_col, &old_col) in order.iter().enumerate() {
        let mut col: Vec<f64> = (0..p).map(|r| v[r * p + old_col]).collect();
        let mut pivot = 0;
        for (r, x) in col.iter().enumerate() {
            if x.abs() > col[pivot].abs() {
                pivot = r;
            }
        }
        if col[pivot] < 0.0 {
            for x in col.iter_mut() {
                *x = -*x;
            }
        }
        for (r, x) in col.iter().enumerate() {
            vectors.set(r, new_col, *x);
        }
    }

    Ok(EigenSystem { values, vectors })
}

/// One Jacobi rotation annihilating a[i][j].
fn rotate(a: &mut [f64], v: &mut [f64], p: usize, i: usize, j: usize) {
    let aij = a[i * p + j];
    let tau = (a[j * p + j] - a[i * p + i]) / (2.0 * aij);
    let t = if tau >= 0.0 {
        1.0 / (tau + (1.0 + tau * tau).sqrt())
    } else {
        -1.0 / (-tau + (1.0 + tau * tau).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;

    for k in 0..p {
        let aik = a[i * p + k];
        let ajk = a[j * p + k];
        a[i * p + k] = c * aik - s * ajk;
        a[j * p + k] = s * aik + c * ajk;
    }
    for k in 0..p {
        let aki = a[k * p + i];
        let akj = a[k * p + j];
        a[k * p + i] = c * aki - s * akj;
        a[k * p + j] = s * aki + c * akj;
    }
    for k in 0..p {
        let vki = v[k * p + i];
        let vkj = v[k * p + j];
        v[k * p + i] = c * vki - s * vkj;
        v[k * p + j] = s * vki + c * vkj;
    }
}

/// True when the smallest eigenvalue is at least `-tol * max(1, largest)`.
pub fn is_psd(m: &SymmetricMatrix, tol: f64) -> bool {
    let eig = eigendecompose(m).expect("jacobi sweep budget exhausted");
    let max = eig.values()[0];
    let min = eig.values()[eig.dim() - 1];
    min >= -tol * max.max(1.0)
}

/// Loewner order test: a ≤ b iff b − a is nonnegative definite within `tol`.
pub fn loewner_leq(a: &SymmetricMatrix, b: &SymmetricMatrix, tol: f64) -> Result<bool> {
    if a.dim() != b.dim() {
        return Err(UniFactorError::DimensionMismatch {
            expected: format!("{}x{}", a.dim(), a.dim()),
            found: format!("{}x{}", b.dim(), b.dim()),
        });
    }
    Ok(is_psd(&b.sub(a), tol))
}

/// Number of eigenvalues with magnitude above `tol * max(1, |λ|_max)`.
pub fn numeric_rank(m: &SymmetricMatrix, tol: f64) -> usize {
    let eig = eigendecompose(m).expect("jacobi sweep budget exhausted");
    let max_abs = eig.spectral_norm();
    let threshold = tol * max_abs.max(1.0);
    eig.values().iter().filter(|x| x.abs() > threshold).count()
}

/// Share of total variance carried by the first q eigenvalues.
pub fn cumulative_proportion(eig: &EigenSystem, q: usize) -> Result<f64> {
    let p = eig.dim();
    if q < 1 || q > p {
        return Err(UniFactorError::InvalidInput(format!(
            "q = {q} outside 1..={p}"
        )));
    }
    let max = eig.values()[0];
    let floor = -DEFAULT_PSD_TOL * max.max(1.0);
    if let Some(&bad) = eig.values().iter().find(|&&x| x < floor) {
        return Err(UniFactorError::NegativeSpectrum { value: bad });
    }
    let total: f64 = eig.values().iter().sum();
    let head: f64 = eig.values()[..q].iter().sum();
    Ok(head / total)
}

/// True when every column of `candidate` lies in span(`basis`) up to a
/// relative projection residual of `tol`.
pub fn subspace_contains(basis: &Matrix, candidate: &Matrix, tol: f64) -> Result<bool> {
    if basis.rows() != candidate.rows() {
        return Err(UniFactorError::DimensionMismatch {
            expected: format!("{} rows", basis.rows()),
            found: format!("{} rows", candidate.rows()),
        });
    }
    let q_basis = orthonormalize(basis, tol, "basis")?;
    orthonormalize(candidate, tol, "candidate")?;

    for j in 0..candidate.cols() {
        let col = candidate.column(j);
        let norm = vec_norm(&col);
        let mut residual = col.clone();
        for k in 0..q_basis.cols() {
            let bk = q_basis.column(k);
            let dot: f64 = bk.iter().zip(&residual).map(|(a, b)| a * b).sum();
            for (r, b) in residual.iter_mut().zip(&bk) {
                *r -= dot * b;
            }
        }
        if vec_norm(&residual) > tol * norm {
            return Ok(false);
        }
    }
    Ok(true)
}

fn vec_norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Modified Gram-Schmidt with a rank check.
fn orthonormalize(m: &Matrix, tol: f64, label: &str) -> Result<Matrix> {
    let mut q = m.clone();
    let scale = m
        .column(0)
        .iter()
        .map(|x| x.abs())
        .fold(1.0_f64, f64::max);
    for j in 0..q.cols() {
        let mut col = q.column(j);
        for k in 0..j {
            let prev = q.column(k);
            let dot: f64 = prev.iter().zip(&col).map(|(a, b)| a * b).sum();
            for (c, p) in col.iter_mut().zip(&prev) {
                *c -= dot * p;
            }
        }
        let n = vec_norm(&col);
        if n <= tol.max(1e-12) * scale {
            return Err(UniFactorError::RankDeficient(format!(
                "{label} column {j} is linearly dependent"
            )));
        }
        for (r, c) in col.iter().enumerate() {
            q.set(r, j, c / n);
        }
    }
    Ok(q)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn sigma_one() -> SymmetricMatrix {
        SymmetricMatrix::new(2, &[2.0, 1.0, 1.0, 3.0]).unwrap()
    }

    /// Brute-force power iteration, independent of the Jacobi path.
    fn power_iteration_top(m: &SymmetricMatrix) -> f64 {
        let p = m.dim();
        let mut x = vec![1.0; p];
        for _ in 0..10_000 {
            let y = m.matvec(&x);
            let n = y.iter().map(|v| v * v).sum::<f64>().sqrt();
            x = y.iter().map(|v| v / n).collect();
        }
        let y = m.matvec(&x);
        x.iter().zip(&y).map(|(a, b)| a * b).sum()
    }

    #[test]
    fn two_by_two_closed_form() {
        let eig = eigendecompose(&sigma_one()).unwrap();
        // roots of the characteristic polynomial x^2 - 5x + 5
        let sqrt5 = 5.0_f64.sqrt();
        assert!((eig.values()[0] - (5.0 + sqrt5) / 2.0).abs() < 1e-12);
        assert!((eig.values()[1] - (5.0 - sqrt5) / 2.0).abs() < 1e-12);
        let v1 = eig.vector(0);
        assert!((v1[0] - 0.5257311121191336).abs() < 1e-10);
        assert!((v1[1] - 0.8506508083520399).abs() < 1e-10);
        // cross-check the top eigenvalue with the power-iteration oracle
        assert!((power_iteration_top(&sigma_one()) - eig.values()[0]).abs() < 1e-9);
    }

    #[test]
    fn identity_is_fixed_point_of_tie_break() {
        let eig = eigendecompose(&SymmetricMatrix::identity(3)).unwrap();
        assert_eq!(eig.values(), &[1.0, 1.0, 1.0]);
        assert_eq!(eig.vectors(), &Matrix::identity(3));
    }

    #[test]
    fn city_covariance_first_component() {
        let sigma = SymmetricMatrix::from_rows(&[
            vec![82.5524, 4.6990, -5.6177],
            vec![4.6990, 4.6262, -1.5502],
            vec![-5.6177, -1.5502, 4.7571],
        ])
        .unwrap();
        let eig = eigendecompose(&sigma).unwrap();
        let r1 = eig.vector(0);
        // residual oracle: sigma r1 = lambda1 r1
        let y = sigma.matvec(&r1);
        for i in 0..3 {
            assert!((y[i] - eig.values()[0] * r1[i]).abs() < 1e-9);
        }
        // frozen from the residual-checked decomposition of the matrix above
        assert!((r1[0] - 0.995509).abs() < 1e-5);
        assert!((r1[1] - 0.060927).abs() < 1e-5);
        assert!((r1[2] + 0.072452).abs() < 1e-5);
    }

    #[test]
    fn random_reconstruction_and_orthonormality() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..200 {
            let p = rng.gen_range(1..=8);
            let mut entries = vec![0.0; p * p];
            for e in entries.iter_mut() {
                *e = rng.gen_range(-3.0..3.0);
            }
            let m = SymmetricMatrix::new(p, &entries).unwrap();
            let eig = eigendecompose(&m).unwrap();

            assert!(eig.reconstruct().max_abs_diff(&m) <= 1e-8);
            for k in 1..p {
                assert!(eig.values()[k - 1] >= eig.values()[k]);
            }
            let vt_v = eig.vectors().transpose().matmul(eig.vectors());
            assert!(vt_v.max_abs_diff(&Matrix::identity(p)) <= 1e-10);
        }
    }

    #[test]
    fn psd_boundary_and_indefinite() {
        assert!(is_psd(
            &SymmetricMatrix::diagonal(&[5.0 / 3.0, 0.0]),
            DEFAULT_PSD_TOL
        ));
        let indefinite = SymmetricMatrix::new(2, &[1.0, 2.0, 2.0, 1.0]).unwrap();
        assert!(!is_psd(&indefinite, DEFAULT_PSD_TOL));
    }

    #[test]
    fn loewner_examples() {
        let d12 = SymmetricMatrix::diagonal(&[1.0, 1.0]);
        let d23 = SymmetricMatrix::diagonal(&[2.0, 3.0]);
        assert!(loewner_leq(&d12, &d23, DEFAULT_PSD_TOL).unwrap());
        let s = sigma_one();
        assert!(loewner_leq(&s, &s, DEFAULT_PSD_TOL).unwrap());

        let phi = (1.0 + 5.0_f64.sqrt()) / 2.0;
        let t_star = SymmetricMatrix::new(2, &[1.0, phi, phi, phi * phi]).unwrap();
        assert!(loewner_leq(&t_star, &s, DEFAULT_PSD_TOL).unwrap());

        let wrong_dim = SymmetricMatrix::identity(3);
        assert!(loewner_leq(&d12, &wrong_dim, DEFAULT_PSD_TOL).is_err());
    }

    #[test]
    fn loewner_antisymmetry_forces_equality() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let p = rng.gen_range(1..=5);
            let mut entries = vec![0.0; p * p];
            for e in entries.iter_mut() {
                *e = rng.gen_range(-2.0..2.0);
            }
            let a = SymmetricMatrix::new(p, &entries).unwrap();
            let mut b = a.clone();
            if rng.gen_bool(0.5) {
                // random PSD bump
                let d: Vec<f64> = (0..p).map(|_| rng.gen_range(0.0..0.5)).collect();
                b = b.add(&SymmetricMatrix::diagonal(&d));
            }
            let ab = loewner_leq(&a, &b, 1e-12).unwrap();
            let ba = loewner_leq(&b, &a, 1e-12).unwrap();
            if ab && ba {
                assert!(a.max_abs_diff(&b) <= 1e-6);
            }
        }
    }

    #[test]
    fn rank_counts() {
        assert_eq!(
            numeric_rank(&SymmetricMatrix::diagonal(&[5.0 / 3.0, 0.0]), DEFAULT_RANK_TOL),
            1
        );
        let ones = SymmetricMatrix::new(3, &[1.0; 9]).unwrap();
        assert_eq!(numeric_rank(&ones, DEFAULT_RANK_TOL), 1);

        // residual of the rank-2 decomposition of the 4x4 example matrix
        let sigma = SymmetricMatrix::from_rows(&[
            vec![3.0, -1.0, -2.0, 2.0],
            vec![-1.0, 2.0, 0.0, -1.0],
            vec![-2.0, 0.0, 4.0, -2.0],
            vec![2.0, -1.0, -2.0, 2.0],
        ])
        .unwrap();
        let t = sigma.sub(&SymmetricMatrix::diagonal(&[1.0, 1.0, 0.0, 0.0]));
        assert!(is_psd(&t, DEFAULT_PSD_TOL));
        assert_eq!(numeric_rank(&t, DEFAULT_RANK_TOL), 2);
    }

    #[test]
    fn proportion_examples_and_monotonicity() {
        let eig = eigendecompose(&sigma_one()).unwrap();
        assert!((cumulative_proportion(&eig, 1).unwrap() - 0.723_606_797_749_979).abs() < 1e-12);
        assert_eq!(cumulative_proportion(&eig, 2).unwrap(), 1.0);

        let id4 = eigendecompose(&SymmetricMatrix::identity(4)).unwrap();
        assert_eq!(cumulative_proportion(&id4, 1).unwrap(), 0.25);

        assert!(cumulative_proportion(&eig, 0).is_err());
        assert!(cumulative_proportion(&eig, 3).is_err());

        let neg = eigendecompose(&SymmetricMatrix::diagonal(&[1.0, -1.0])).unwrap();
        assert!(cumulative_proportion(&neg, 1).is_err());

        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let p = rng.gen_range(2..=6);
            let d: Vec<f64> = (0..p).map(|_| rng.gen_range(0.0..4.0)).collect();
            let eig = eigendecompose(&SymmetricMatrix::diagonal(&d)).unwrap();
            let mut prev = 0.0;
            for q in 1..=p {
                let c = cumulative_proportion(&eig, q).unwrap();
                assert!(c >= prev - 1e-12);
                prev = c;
            }
            assert!((prev - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn subspace_membership() {
        let sigma = sigma_one();
        let eig = eigendecompose(&sigma).unwrap();
        let basis = eig.vectors().leading_columns(2);
        let first = eig.vectors().leading_columns(1);
        assert!(subspace_contains(&basis, &first, 1e-8).unwrap());

        let e1 = Matrix::from_rows(&[vec![1.0], vec![0.0]]).unwrap();
        let e2 = Matrix::from_rows(&[vec![0.0], vec![1.0]]).unwrap();
        assert!(!subspace_contains(&e1, &e2, 1e-8).unwrap());

        let b = Matrix::from_rows(&[
            vec![1.0, 0.0],
            vec![0.0, 1.0],
            vec![0.0, 0.0],
        ])
        .unwrap();
        let inv_sqrt2 = 1.0 / 2.0_f64.sqrt();
        let combo =
            Matrix::from_rows(&[vec![inv_sqrt2], vec![inv_sqrt2], vec![0.0]]).unwrap();
        assert!(subspace_contains(&b, &combo, 1e-8).unwrap());

        let dependent = Matrix::from_rows(&[
            vec![1.0, 2.0],
            vec![1.0, 2.0],
            vec![0.0, 0.0],
        ])
        .unwrap();
        assert!(subspace_contains(&dependent, &combo, 1e-8).is_err());
    }
}

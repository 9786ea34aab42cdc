//! Dense matrix value types.
//!
//! Everything here is sized for desk-scale covariance work (p up to a few
//! hundred): row-major storage, no sparsity, plain `f64`. [`SymmetricMatrix`]
//! symmetrizes on construction so downstream code can rely on exact
//! `a[i][j] == a[j][i]`.

use crate::error::{Result, UniFactorError};

/// General dense row-major matrix. Used for loadings, eigenvector bases and
/// other rectangular data; square symmetric data lives in [`SymmetricMatrix`].
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "matrix dimensions must be positive");
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        if rows.is_empty() || rows[0].is_empty() {
            return Err(UniFactorError::InvalidInput("empty matrix".into()));
        }
        let cols = rows[0].len();
        for (i, r) in rows.iter().enumerate() {
            if r.len() != cols {
                return Err(UniFactorError::DimensionMismatch {
                    expected: format!("{cols} columns"),
                    found: format!("{} columns in row {i}", r.len()),
                });
            }
        }
        let data = rows.iter().flatten().copied().collect();
        Ok(Matrix {
            rows: rows.len(),
            cols,
            data,
        })
    }

    /// Builds a single-column matrix from a vector.
    pub fn column_vector(v: &[f64]) -> Self {
        Matrix {
            rows: v.len(),
            cols: 1,
            data: v.to_vec(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    /// Copies columns `0..k` into a new matrix.
    pub fn leading_columns(&self, k: usize) -> Matrix {
        assert!(k >= 1 && k <= self.cols);
        let mut out = Matrix::zeros(self.rows, k);
        for i in 0..self.rows {
            for j in 0..k {
                out.set(i, j, self.get(i, j));
            }
        }
        out
    }

    pub fn transpose(&self) -> Matrix {
        let mut out = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(j, i, self.get(i, j));
            }
        }
        out
    }

    pub fn matmul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows, "inner dimensions must agree");
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out.data[i * other.cols + j] += a * other.get(k, j);
                }
            }
        }
        out
    }

    pub fn scaled(&self, s: f64) -> Matrix {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|x| x * s).collect(),
        }
    }

    /// A · x for a column vector x.
    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(self.cols, x.len());
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self.get(i, j) * x[j]).sum())
            .collect()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn max_abs_diff(&self, other: &Matrix) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn to_nested(&self) -> Vec<Vec<f64>> {
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self.get(i, j)).collect())
            .collect()
    }
}

/// Dense p×p symmetric matrix. Entries are symmetrized (averaged across the
/// diagonal) on construction, so `get(i, j) == get(j, i)` holds exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricMatrix {
    dim: usize,
    data: Vec<f64>,
}

impl SymmetricMatrix {
    /// Constructs from a row-major entry slice of length `dim * dim`.
    pub fn new(dim: usize, entries: &[f64]) -> Result<Self> {
        if dim == 0 {
            return Err(UniFactorError::InvalidInput(
                "symmetric matrix dimension must be at least 1".into(),
            ));
        }
        if entries.len() != dim * dim {
            return Err(UniFactorError::DimensionMismatch {
                expected: format!("{} entries", dim * dim),
                found: format!("{}", entries.len()),
            });
        }
        if entries.iter().any(|x| !x.is_finite()) {
            return Err(UniFactorError::InvalidInput(
                "matrix entries must be finite".into(),
            ));
        }
        let mut data = vec![0.0; dim * dim];
        for i in 0..dim {
            for j in 0..dim {
                let avg = 0.5 * (entries[i * dim + j] + entries[j * dim + i]);
                data[i * dim + j] = avg;
            }
        }
        Ok(SymmetricMatrix { dim, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.len();
        for (i, r) in rows.iter().enumerate() {
            if r.len() != dim {
                return Err(UniFactorError::DimensionMismatch {
                    expected: format!("{dim} columns"),
                    found: format!("{} columns in row {i}", r.len()),
                });
            }
        }
        let entries: Vec<f64> = rows.iter().flatten().copied().collect();
        SymmetricMatrix::new(dim, &entries)
    }

    pub fn zeros(dim: usize) -> Self {
        SymmetricMatrix {
            dim,
            data: vec![0.0; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = SymmetricMatrix::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = 1.0;
        }
        m
    }

    pub fn diagonal(d: &[f64]) -> Self {
        let mut m = SymmetricMatrix::zeros(d.len());
        for (i, &x) in d.iter().enumerate() {
            m.data[i * d.len() + i] = x;
        }
        m
    }

    /// A · Aᵀ for a p×q loading matrix.
    pub fn from_loading(a: &Matrix) -> Self {
        let p = a.rows();
        let mut m = SymmetricMatrix::zeros(p);
        for i in 0..p {
            for j in 0..=i {
                let mut s = 0.0;
                for k in 0..a.cols() {
                    s += a.get(i, k) * a.get(j, k);
                }
                m.data[i * p + j] = s;
                m.data[j * p + i] = s;
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.dim + j]
    }

    /// Sets entries (i, j) and (j, i) together.
    pub fn set_sym(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.dim + j] = v;
        self.data[j * self.dim + i] = v;
    }

    pub fn add(&self, other: &SymmetricMatrix) -> SymmetricMatrix {
        assert_eq!(self.dim, other.dim, "dimensions must agree");
        SymmetricMatrix {
            dim: self.dim,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, other: &SymmetricMatrix) -> SymmetricMatrix {
        assert_eq!(self.dim, other.dim, "dimensions must agree");
        SymmetricMatrix {
            dim: self.dim,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    pub fn scaled(&self, s: f64) -> SymmetricMatrix {
        SymmetricMatrix {
            dim: self.dim,
            data: self.data.iter().map(|x| x * s).collect(),
        }
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn max_abs_diff(&self, other: &SymmetricMatrix) -> f64 {
        assert_eq!(self.dim, other.dim);
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn diagonal_entries(&self) -> Vec<f64> {
        (0..self.dim).map(|i| self.get(i, i)).collect()
    }

    /// Largest diagonal entry; used for scale-aware step sizing.
    pub fn max_diagonal(&self) -> f64 {
        self.diagonal_entries().iter().fold(f64::MIN, |m, &x| m.max(x))
    }

    /// xᵀ M x.
    pub fn quadratic_form(&self, x: &[f64]) -> f64 {
        assert_eq!(x.len(), self.dim);
        let mut s = 0.0;
        for i in 0..self.dim {
            for j in 0..self.dim {
                s += x[i] * self.get(i, j) * x[j];
            }
        }
        s
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.dim);
        (0..self.dim)
            .map(|i| (0..self.dim).map(|j| self.get(i, j) * x[j]).sum())
            .collect()
    }

    pub fn to_matrix(&self) -> Matrix {
        Matrix {
            rows: self.dim,
            cols: self.dim,
            data: self.data.clone(),
        }
    }

    pub fn to_nested(&self) -> Vec<Vec<f64>> {
        (0..self.dim)
            .map(|i| (0..self.dim).map(|j| self.get(i, j)).collect())
            .collect()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }
}

/// n observations of a p-variate vector, row per observation.
#[derive(Debug, Clone)]
pub struct DataMatrix {
    n: usize,
    p: usize,
    rows: Vec<f64>,
}

impl DataMatrix {
    pub fn new(rows: &[Vec<f64>]) -> Result<Self> {
        if rows.len() < 2 {
            return Err(UniFactorError::InvalidInput(format!(
                "need at least 2 observations, got {}",
                rows.len()
            )));
        }
        let p = rows[0].len();
        if p == 0 {
            return Err(UniFactorError::InvalidInput(
                "observations must have at least one variable".into(),
            ));
        }
        for (i, r) in rows.iter().enumerate() {
            if r.len() != p {
                return Err(UniFactorError::DimensionMismatch {
                    expected: format!("{p} variables"),
                    found: format!("{} in observation {i}", r.len()),
                });
            }
        }
        Ok(DataMatrix {
            n: rows.len(),
            p,
            rows: rows.iter().flatten().copied().collect(),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.rows[i * self.p..(i + 1) * self.p]
    }
}

/// Divisor convention for covariance estimation from raw observations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CovarianceEstimator {
    /// Mean-centered cross products divided by n.
    MaximumLikelihood,
    /// Mean-centered cross products divided by n − 1.
    Sample,
}

/// Mean-centered covariance estimate of the observations.
pub fn covariance_from_data(
    data: &DataMatrix,
    estimator: CovarianceEstimator,
) -> Result<SymmetricMatrix> {
    let (n, p) = (data.n(), data.p());
    let mut mean = vec![0.0; p];
    for i in 0..n {
        for (j, m) in mean.iter_mut().enumerate() {
            *m += data.row(i)[j];
        }
    }
    for m in mean.iter_mut() {
        *m /= n as f64;
    }

    let divisor = match estimator {
        CovarianceEstimator::MaximumLikelihood => n as f64,
        CovarianceEstimator::Sample => (n - 1) as f64,
    };

    let mut cov = vec![0.0; p * p];
    for i in 0..n {
        let row = data.row(i);
        for a in 0..p {
            let da = row[a] - mean[a];
            for b in 0..=a {
                let v = da * (row[b] - mean[b]);
                cov[a * p + b] += v;
            }
        }
    }
    for a in 0..p {
        for b in 0..=a {
            let v = cov[a * p + b] / divisor;
            cov[a * p + b] = v;
            cov[b * p + a] = v;
        }
    }
    if cov.iter().any(|x| !x.is_finite()) {
        return Err(UniFactorError::DegenerateData(
            "covariance contains non-finite values".into(),
        ));
    }
    SymmetricMatrix::new(p, &cov)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetrizes_on_construction() {
        let m = SymmetricMatrix::new(2, &[1.0, 2.0, 4.0, 3.0]).unwrap();
        assert_eq!(m.get(0, 1), 3.0);
        assert_eq!(m.get(1, 0), 3.0);
    }

    #[test]
    fn rejects_empty_and_ragged() {
        assert!(SymmetricMatrix::new(0, &[]).is_err());
        assert!(SymmetricMatrix::from_rows(&[vec![1.0, 2.0], vec![3.0]]).is_err());
        assert!(Matrix::from_rows(&[]).is_err());
    }

    #[test]
    fn loading_outer_product() {
        let a = Matrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
        let t = SymmetricMatrix::from_loading(&a);
        assert_eq!(t.get(0, 0), 5.0);
        assert_eq!(t.get(0, 1), 11.0);
        assert_eq!(t.get(1, 1), 25.0);
    }

    #[test]
    fn covariance_ml_and_sample() {
        let d = DataMatrix::new(&[vec![1.0, 0.0], vec![-1.0, 0.0]]).unwrap();
        let ml = covariance_from_data(&d, CovarianceEstimator::MaximumLikelihood).unwrap();
        assert_eq!(ml.get(0, 0), 1.0);
        assert_eq!(ml.get(0, 1), 0.0);
        assert_eq!(ml.get(1, 1), 0.0);
        let s = covariance_from_data(&d, CovarianceEstimator::Sample).unwrap();
        assert_eq!(s.get(0, 0), 2.0);
        assert_eq!(s.get(1, 1), 0.0);
    }

    #[test]
    fn covariance_three_point_hand_check() {
        // direct formula over the 3 points
        let d = DataMatrix::new(&[vec![0.0, 0.0], vec![1.0, 1.0], vec![2.0, 2.0]]).unwrap();
        let ml = covariance_from_data(&d, CovarianceEstimator::MaximumLikelihood).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert!((ml.get(i, j) - 2.0 / 3.0).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn covariance_rejects_non_finite() {
        let d = DataMatrix::new(&[vec![f64::NAN, 0.0], vec![1.0, 0.0]]).unwrap();
        assert!(covariance_from_data(&d, CovarianceEstimator::MaximumLikelihood).is_err());
    }

    #[test]
    fn data_matrix_needs_two_rows() {
        assert!(DataMatrix::new(&[vec![1.0, 2.0]]).is_err());
    }

    #[test]
    fn ml_sample_scaling_identity() {
        let d = DataMatrix::new(&[
            vec![0.3, -1.2, 0.7],
            vec![1.1, 0.4, -0.2],
            vec![-0.5, 0.9, 1.3],
            vec![0.8, -0.1, 0.2],
        ])
        .unwrap();
        let ml = covariance_from_data(&d, CovarianceEstimator::MaximumLikelihood).unwrap();
        let s = covariance_from_data(&d, CovarianceEstimator::Sample).unwrap();
        let n = d.n() as f64;
        let rescaled = ml.scaled(n / (n - 1.0));
        assert!(rescaled.max_abs_diff(&s) < 1e-12);
    }
}

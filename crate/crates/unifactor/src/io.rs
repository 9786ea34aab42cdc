//! CSV ingestion for covariance matrices and raw observations.
//!
//! Matrix files are p comma-separated numeric rows with no header. Symmetry
//! is enforced by averaging mirrored entries; inputs whose asymmetry exceeds
//! 1e-6 are rejected outright.

use crate::error::{Result, UniFactorError};
use crate::matrix::{DataMatrix, SymmetricMatrix};

/// Largest tolerated |a_ij − a_ji| before a matrix file is rejected.
pub const MATRIX_ASYMMETRY_TOL: f64 = 1e-6;

fn parse_rows(text: &str) -> Result<Vec<Vec<f64>>> {
    let mut rows = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let mut row = Vec::new();
        for field in line.split(',') {
            let field = field.trim();
            let value: f64 = field.parse().map_err(|_| UniFactorError::Parse {
                line: idx + 1,
                message: format!("cannot parse {field:?} as a number"),
            })?;
            if !value.is_finite() {
                return Err(UniFactorError::Parse {
                    line: idx + 1,
                    message: format!("non-finite value {field:?}"),
                });
            }
            row.push(value);
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(UniFactorError::Parse {
            line: 0,
            message: "file contains no data rows".into(),
        });
    }
    let width = rows[0].len();
    for (i, r) in rows.iter().enumerate() {
        if r.len() != width {
            return Err(UniFactorError::Parse {
                line: i + 1,
                message: format!("expected {width} fields, found {}", r.len()),
            });
        }
    }
    Ok(rows)
}

pub fn parse_matrix_csv(text: &str) -> Result<SymmetricMatrix> {
    let rows = parse_rows(text)?;
    let p = rows.len();
    if rows[0].len() != p {
        return Err(UniFactorError::Parse {
            line: 1,
            message: format!("matrix must be square, got {p} rows of {} fields", rows[0].len()),
        });
    }
    let mut max_asym = 0.0_f64;
    for (i, row) in rows.iter().enumerate() {
        for (j, value) in row.iter().enumerate() {
            max_asym = max_asym.max((value - rows[j][i]).abs());
        }
    }
    if max_asym > MATRIX_ASYMMETRY_TOL {
        return Err(UniFactorError::AsymmetricInput {
            max_asymmetry: max_asym,
            tolerance: MATRIX_ASYMMETRY_TOL,
        });
    }
    SymmetricMatrix::from_rows(&rows)
}

pub fn parse_data_csv(text: &str) -> Result<DataMatrix> {
    let rows = parse_rows(text)?;
    DataMatrix::new(&rows)
}

/// Full round-trip precision CSV of a symmetric matrix.
pub fn matrix_to_csv(m: &SymmetricMatrix) -> String {
    let mut s = String::new();
    for i in 0..m.dim() {
        let row: Vec<String> = (0..m.dim()).map(|j| format!("{}", m.get(i, j))).collect();
        s.push_str(&row.join(","));
        s.push('\n');
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_simple_matrix() {
        let m = parse_matrix_csv("2,1\n1,3\n").unwrap();
        assert_eq!(m.dim(), 2);
        assert_eq!(m.get(0, 1), 1.0);
    }

    #[test]
    fn rejects_asymmetric() {
        let err = parse_matrix_csv("1,2\n3,4\n").unwrap_err();
        assert!(matches!(err, UniFactorError::AsymmetricInput { .. }));
    }

    #[test]
    fn averages_sub_tolerance_asymmetry() {
        let m = parse_matrix_csv("1,0.9999997\n1.0000003,1\n").unwrap();
        assert_eq!(m.get(0, 1), m.get(1, 0));
        assert!((m.get(0, 1) - 1.0).abs() < 1e-6);
    }

    #[test]
    fn reports_line_numbers() {
        let err = parse_matrix_csv("1,2\nx,4\n").unwrap_err();
        match err {
            UniFactorError::Parse { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
        let err = parse_matrix_csv("1,2\n3\n").unwrap_err();
        match err {
            UniFactorError::Parse { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rejects_non_square_matrix() {
        assert!(parse_matrix_csv("1,2,3\n4,5,6\n").is_err());
    }

    #[test]
    fn parses_data_rows() {
        let d = parse_data_csv("1,2\n3,4\n5,6\n").unwrap();
        assert_eq!(d.n(), 3);
        assert_eq!(d.p(), 2);
        assert!(parse_data_csv("1,2\n").is_err());
    }

    proptest! {
        #[test]
        fn matrix_round_trip(dim in 1usize..6, seed in 0u64..500) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let mut entries = vec![0.0; dim * dim];
            for e in entries.iter_mut() {
                *e = rng.gen_range(-1e6..1e6);
            }
            let m = SymmetricMatrix::new(dim, &entries).unwrap();
            let back = parse_matrix_csv(&matrix_to_csv(&m)).unwrap();
            for i in 0..dim {
                for j in 0..dim {
                    prop_assert_eq!(m.get(i, j), back.get(i, j));
                }
            }
        }
    }
}

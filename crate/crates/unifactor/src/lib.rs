//! Covariance decomposition toolkit.
//!
//! Splits a covariance matrix Σ into a low-rank part T = AAᵀ and a residual
//! V under a family of losses:
//!
//! - exact low-rank approximation by truncated eigendecomposition ([`pca`]),
//! - factor analysis by least squares, penalized least squares, and maximum
//!   likelihood ([`fa`]),
//! - a weighted homotopy sweeping from the low-rank loss to the
//!   factor-analysis loss ([`path`]),
//! - the principal component factor model, whose loading column space equals
//!   the span of the top eigenvectors of the implied covariance ([`pcfm`]).
//!
//! Everything is deterministic: the eigensolver, the coordinate searches and
//! the coordinate descents use fixed orderings and tie-breaks, so repeated
//! runs produce identical results.

pub mod decomposition;
pub mod eigen;
pub mod error;
pub mod fa;
pub mod io;
pub mod matrix;
pub mod objective;
pub mod path;
pub mod pca;
pub mod pcfm;
pub mod report;
pub mod search;

pub use decomposition::Decomposition;
pub use eigen::{
    cumulative_proportion, eigendecompose, is_psd, loewner_leq, numeric_rank, subspace_contains,
    EigenSystem, DEFAULT_PSD_TOL, DEFAULT_RANK_TOL,
};
pub use error::{Result, UniFactorError};
pub use fa::{fit_fa_ls, fit_fa_ml, fit_fa_pls, lambda_sweep, FaFit, FaFitConfig};
pub use matrix::{covariance_from_data, CovarianceEstimator, DataMatrix, Matrix, SymmetricMatrix};
pub use objective::{ObjectiveFamily, ObjectiveSpec};
pub use path::{emit_path_csv, solve_path, PathConfig, PathPoint};
pub use pca::{pca_report, solve_pca, PcaReport, PcaSolution};
pub use pcfm::{
    build_qp, fit_pcfm, principal_component_index, solve_nnqp, PcfmConfig, PcfmFit, PcfmObjective,
    QpProblem,
};
pub use report::FitReport;
pub use search::{
    delinearize_loading, linearize_loading, unidirectional_search, SearchOutcome, SearchProblem,
    SearchSettings, SearchTrace,
};

//! Command-line front end: data ingestion, solver dispatch, report emission.
//!
//! Exit codes: 0 on success, 2 on input/validation problems, 3 when a solver
//! reports non-convergence (artifacts are still written) or fails outright.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use unifactor::fa::emit_sweep_csv;
use unifactor::objective::{ObjectiveFamily, ObjectiveSpec, OffDiagBase, PenaltyBase};
use unifactor::*;

#[derive(Parser)]
#[command(
    name = "unifactor",
    about = "Covariance decomposition: exact truncation, factor analysis, homotopy paths, principal component factor models",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct InputArgs {
    /// Covariance matrix CSV (square, no header)
    #[arg(long, value_name = "FILE", conflicts_with = "data")]
    cov: Option<PathBuf>,
    /// Raw observation CSV, one row per observation
    #[arg(long, value_name = "FILE")]
    data: Option<PathBuf>,
    /// Covariance estimator applied to --data
    #[arg(long, value_enum, default_value_t = EstimatorArg::Ml)]
    estimator: EstimatorArg,
}

#[derive(Clone, Copy, ValueEnum)]
enum EstimatorArg {
    /// Divide centered cross products by n
    Ml,
    /// Divide centered cross products by n - 1
    Sample,
}

#[derive(Subcommand)]
enum Command {
    /// Exact low-rank approximation report
    Pca {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long)]
        q: usize,
        #[arg(long, value_name = "FILE")]
        output: Option<PathBuf>,
    },
    /// Factor analysis fit
    Fa {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long, value_enum)]
        method: FaMethod,
        #[arg(long)]
        q: usize,
        /// Penalty weight (pls only)
        #[arg(long)]
        lambda: Option<f64>,
        /// Loss-decrease stopping threshold of the descent
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long)]
        max_iters: Option<usize>,
        #[arg(long, value_name = "FILE")]
        output: Option<PathBuf>,
    },
    /// Penalized fits across a lambda grid (CSV: lambda,v_fro,ls_loss)
    Sweep {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long)]
        q: usize,
        /// Comma-separated penalty weights
        #[arg(long, value_delimiter = ',', required = true)]
        lambdas: Vec<f64>,
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long)]
        max_iters: Option<usize>,
        #[arg(long, value_name = "FILE")]
        output: Option<PathBuf>,
    },
    /// Homotopy path between the truncation and factor losses (CSV)
    Path {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long)]
        q: usize,
        /// Number of weight steps between 1 and 0
        #[arg(long, default_value_t = 20)]
        grid_steps: usize,
        #[arg(long, value_name = "FILE")]
        output: Option<PathBuf>,
    },
    /// Principal component factor model fit (JSON)
    Pcfm {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long, value_enum)]
        objective: PcfmObjectiveArg,
        #[arg(long)]
        q: usize,
        #[arg(long, value_name = "FILE")]
        output: Option<PathBuf>,
    },
    /// Evaluate a single loss at a given decomposition
    Loss {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long, value_enum)]
        objective: LossArg,
        /// Low-rank part T (matrix CSV)
        #[arg(long, value_name = "FILE")]
        t: PathBuf,
        /// Residual part V (matrix CSV; required by the two-matrix losses)
        #[arg(long, value_name = "FILE")]
        v: Option<PathBuf>,
        #[arg(long)]
        tau: Option<f64>,
        #[arg(long)]
        lambda: Option<f64>,
        #[arg(long)]
        w: Option<f64>,
        /// Base norm for f_offdiag and penalized_ml_f
        #[arg(long, value_enum)]
        base: Option<BaseArg>,
        #[arg(long, value_name = "FILE")]
        output: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum FaMethod {
    Ls,
    Pls,
    Ml,
}

#[derive(Clone, Copy, ValueEnum)]
enum PcfmObjectiveArg {
    Ls,
    Ml,
}

#[derive(Clone, Copy, ValueEnum, Debug)]
#[value(rename_all = "snake_case")]
enum LossArg {
    Trace,
    Spectral,
    Frobenius,
    FrobeniusSq,
    Rank,
    ModifiedL0,
    FTau,
    FOffdiag,
    NegLoglik,
    PenalizedMlF,
    PenalizedMlV2,
    Ls,
    Pls,
    Path,
    Wasserstein,
}

#[derive(Clone, Copy, ValueEnum)]
enum BaseArg {
    Trace,
    Spectral,
    Frobenius,
}

type CliResult<T> = std::result::Result<T, CliError>;

enum CliError {
    /// Bad inputs or flags.
    Validation(String),
    /// The solver could not produce a usable result.
    Solver(String),
    /// The solver produced a result flagged as non-converged.
    NotConverged,
}

impl From<UniFactorError> for CliError {
    fn from(e: UniFactorError) -> Self {
        match e {
            UniFactorError::IterationFailure { .. }
            | UniFactorError::SingularModel(_)
            | UniFactorError::InfeasibleStart
            | UniFactorError::DegenerateBasis { .. } => CliError::Solver(e.to_string()),
            other => CliError::Validation(other.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Validation(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Solver(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
        Err(CliError::NotConverged) => {
            eprintln!("warning: solver did not converge; artifact written with converged: false");
            ExitCode::from(3)
        }
    }
}

fn read_file(path: &PathBuf) -> CliResult<String> {
    fs::read_to_string(path)
        .map_err(|e| CliError::Validation(format!("cannot read {}: {e}", path.display())))
}

fn load_sigma(input: &InputArgs) -> CliResult<SymmetricMatrix> {
    match (&input.cov, &input.data) {
        (Some(path), None) => Ok(io::parse_matrix_csv(&read_file(path)?)?),
        (None, Some(path)) => {
            let data = io::parse_data_csv(&read_file(path)?)?;
            let estimator = match input.estimator {
                EstimatorArg::Ml => CovarianceEstimator::MaximumLikelihood,
                EstimatorArg::Sample => CovarianceEstimator::Sample,
            };
            Ok(covariance_from_data(&data, estimator)?)
        }
        _ => Err(CliError::Validation(
            "provide exactly one of --cov or --data".into(),
        )),
    }
}

fn write_artifact(output: &Option<PathBuf>, text: &str) -> CliResult<()> {
    match output {
        Some(path) => fs::write(path, text)
            .map_err(|e| CliError::Validation(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Search budgets honor the UNIFACTOR_MAX_EVALS override.
fn search_settings(sigma: &SymmetricMatrix) -> CliResult<Option<SearchSettings>> {
    match std::env::var("UNIFACTOR_MAX_EVALS") {
        Err(_) => Ok(None),
        Ok(raw) => {
            let max_evals: usize = raw.parse().map_err(|_| {
                CliError::Validation(format!(
                    "UNIFACTOR_MAX_EVALS must be a positive integer, got {raw:?}"
                ))
            })?;
            let mut settings = SearchSettings::scaled_to(sigma);
            settings.max_evals = max_evals;
            Ok(Some(settings))
        }
    }
}

#[derive(Serialize)]
struct PcaArtifact {
    q: usize,
    cumulative_proportion: f64,
    well_represented: bool,
    rank_collapse: bool,
    component_variances: Vec<f64>,
    loading: Vec<Vec<f64>>,
    t: Vec<Vec<f64>>,
    v: Vec<Vec<f64>>,
}

#[derive(Serialize)]
struct FaArtifact {
    method: String,
    q: usize,
    lambda: f64,
    loading: Vec<Vec<f64>>,
    t: Vec<Vec<f64>>,
    v: Vec<Vec<f64>>,
    v_fro: f64,
    ls_loss: f64,
    objective: f64,
    iterations: usize,
    converged: bool,
}

#[derive(Serialize)]
struct PcfmArtifact {
    gamma: Vec<f64>,
    v: Vec<f64>,
    basis: Vec<Vec<f64>>,
    loading: Vec<Vec<f64>>,
    objective: f64,
    iterations: usize,
    converged: bool,
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("artifact serialization");
    s.push('\n');
    s
}

fn run(command: Command) -> CliResult<()> {
    match command {
        Command::Pca { input, q, output } => {
            let sigma = load_sigma(&input)?;
            let report = pca_report(&sigma, q)?;
            let artifact = PcaArtifact {
                q,
                cumulative_proportion: report.cumulative_proportion,
                well_represented: report.well_represented,
                rank_collapse: report.solution.rank_collapse,
                component_variances: report.component_variances,
                loading: report
                    .solution
                    .decomposition
                    .loading()
                    .expect("pca carries a loading")
                    .to_nested(),
                t: report.solution.decomposition.low_rank().to_nested(),
                v: report.solution.decomposition.residual().to_nested(),
            };
            write_artifact(&output, &to_json(&artifact))
        }

        Command::Fa {
            input,
            method,
            q,
            lambda,
            eps,
            max_iters,
            output,
        } => {
            let sigma = load_sigma(&input)?;
            let mut config = FaFitConfig::new(q);
            if let Some(e) = eps {
                config.eps = e;
            }
            if let Some(m) = max_iters {
                config.max_iters = m;
            }
            let (fit, method_name) = match method {
                FaMethod::Ls => {
                    if lambda.unwrap_or(0.0) != 0.0 {
                        return Err(CliError::Validation(
                            "--lambda is not accepted by --method ls".into(),
                        ));
                    }
                    (fit_fa_ls(&sigma, &config)?, "ls")
                }
                FaMethod::Pls => {
                    config.lambda = lambda.ok_or_else(|| {
                        CliError::Validation("--method pls requires --lambda".into())
                    })?;
                    (fit_fa_pls(&sigma, &config)?, "pls")
                }
                FaMethod::Ml => {
                    if lambda.is_some() {
                        return Err(CliError::Validation(
                            "--lambda is not accepted by --method ml".into(),
                        ));
                    }
                    (fit_fa_ml(&sigma, q, search_settings(&sigma)?)?, "ml")
                }
            };
            let resid = sigma
                .sub(fit.decomposition.low_rank())
                .sub(fit.decomposition.residual());
            let artifact = FaArtifact {
                method: method_name.to_string(),
                q,
                lambda: config.lambda,
                loading: fit
                    .decomposition
                    .loading()
                    .expect("factor fits carry a loading")
                    .to_nested(),
                t: fit.decomposition.low_rank().to_nested(),
                v: fit.decomposition.residual().to_nested(),
                v_fro: fit.decomposition.residual().frobenius_norm(),
                ls_loss: resid.frobenius_norm().powi(2),
                objective: fit.report.objective(),
                iterations: fit.report.iterations,
                converged: fit.report.converged,
            };
            write_artifact(&output, &to_json(&artifact))?;
            if !fit.report.converged {
                return Err(CliError::NotConverged);
            }
            Ok(())
        }

        Command::Sweep {
            input,
            q,
            lambdas,
            eps,
            max_iters,
            output,
        } => {
            let sigma = load_sigma(&input)?;
            let points = lambda_sweep(
                &sigma,
                q,
                &lambdas,
                eps.unwrap_or(FaFitConfig::DEFAULT_EPS),
                max_iters.unwrap_or(FaFitConfig::DEFAULT_MAX_ITERS),
            )?;
            write_artifact(&output, &emit_sweep_csv(&points))
        }

        Command::Path {
            input,
            q,
            grid_steps,
            output,
        } => {
            let sigma = load_sigma(&input)?;
            if grid_steps == 0 {
                return Err(CliError::Validation("--grid-steps must be at least 1".into()));
            }
            let mut config = PathConfig::uniform(q, grid_steps);
            config.search = search_settings(&sigma)?;
            let points = solve_path(&sigma, &config)?;
            write_artifact(&output, &emit_path_csv(&points))
        }

        Command::Pcfm {
            input,
            objective,
            q,
            output,
        } => {
            let sigma = load_sigma(&input)?;
            let config = PcfmConfig {
                search: search_settings(&sigma)?,
                ..PcfmConfig::default()
            };
            let objective = match objective {
                PcfmObjectiveArg::Ls => PcfmObjective::LeastSquares,
                PcfmObjectiveArg::Ml => PcfmObjective::MaximumLikelihood,
            };
            let fit = fit_pcfm(&sigma, q, objective, &config)?;
            let artifact = PcfmArtifact {
                gamma: fit.gamma.clone(),
                v: fit.v.clone(),
                basis: fit.basis.to_nested(),
                loading: fit.loading.to_nested(),
                objective: fit.objective,
                iterations: fit.report.iterations,
                converged: fit.report.converged,
            };
            write_artifact(&output, &to_json(&artifact))?;
            if !fit.report.converged {
                return Err(CliError::NotConverged);
            }
            Ok(())
        }

        Command::Loss {
            input,
            objective,
            t,
            v,
            tau,
            lambda,
            w,
            base,
            output,
        } => {
            let sigma = load_sigma(&input)?;
            let t_matrix = io::parse_matrix_csv(&read_file(&t)?)?;
            let v_matrix = match &v {
                Some(path) => Some(io::parse_matrix_csv(&read_file(path)?)?),
                None => None,
            };
            let family = build_family(objective, tau, lambda, w, base)?;
            let spec = ObjectiveSpec::new(family, sigma)?;
            let value = spec.evaluate(&t_matrix, v_matrix.as_ref())?;
            write_artifact(&output, &format!("{value}\n"))
        }
    }
}

fn build_family(
    objective: LossArg,
    tau: Option<f64>,
    lambda: Option<f64>,
    w: Option<f64>,
    base: Option<BaseArg>,
) -> CliResult<ObjectiveFamily> {
    let need = |name: &str, opt: Option<f64>| {
        opt.ok_or_else(|| CliError::Validation(format!("{objective:?} requires --{name}")))
    };
    Ok(match objective {
        LossArg::Trace => ObjectiveFamily::Trace,
        LossArg::Spectral => ObjectiveFamily::Spectral,
        LossArg::Frobenius => ObjectiveFamily::Frobenius,
        LossArg::FrobeniusSq => ObjectiveFamily::FrobeniusSq,
        LossArg::Rank => ObjectiveFamily::Rank,
        LossArg::ModifiedL0 => ObjectiveFamily::ModifiedL0,
        LossArg::FTau => ObjectiveFamily::FTau {
            tau: need("tau", tau)?,
        },
        LossArg::FOffdiag => {
            let base = match base.unwrap_or(BaseArg::Frobenius) {
                BaseArg::Spectral => OffDiagBase::Spectral,
                BaseArg::Frobenius => OffDiagBase::Frobenius,
                BaseArg::Trace => {
                    return Err(CliError::Validation(
                        "f_offdiag is identically zero under trace; use spectral or frobenius"
                            .into(),
                    ))
                }
            };
            ObjectiveFamily::FOffdiag { base }
        }
        LossArg::NegLoglik => ObjectiveFamily::NegLoglik,
        LossArg::PenalizedMlF => ObjectiveFamily::PenalizedMlF {
            lambda: need("lambda", lambda)?,
            base: match base.unwrap_or(BaseArg::Frobenius) {
                BaseArg::Trace => PenaltyBase::Trace,
                BaseArg::Spectral => PenaltyBase::Spectral,
                BaseArg::Frobenius => PenaltyBase::Frobenius,
            },
        },
        LossArg::PenalizedMlV2 => ObjectiveFamily::PenalizedMlV2 {
            lambda: need("lambda", lambda)?,
        },
        LossArg::Ls => ObjectiveFamily::Ls,
        LossArg::Pls => ObjectiveFamily::Pls {
            lambda: need("lambda", lambda)?,
        },
        LossArg::Path => ObjectiveFamily::Path { w: need("w", w)? },
        LossArg::Wasserstein => ObjectiveFamily::Wasserstein,
    })
}

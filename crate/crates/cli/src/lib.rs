//! Command-line front end for `spectral-means`.
//!
//! Exit codes: 0 success, 1 verification violations, 2 parse or validation
//! errors, 3 numerical failures, 4 solver did not converge.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod matrix_file;
pub mod report;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use spectral_means::Error;
use thiserror::Error;

pub use matrix_file::MatrixFile;
pub use report::{fmt_sig, RunReport};

pub const EXIT_VIOLATION: i32 = 1;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_NOT_CONVERGED: i32 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    /// An error raised while validating user-supplied data.
    pub fn from_input(e: Error) -> Self {
        CliError::Validation(e.to_string())
    }

    /// An error raised during computation: domain errors are the caller's
    /// fault, everything else is numerical.
    pub fn from_compute(e: Error) -> Self {
        match e {
            Error::InvalidParameter(_)
            | Error::DimensionMismatch { .. }
            | Error::NotSquare { .. }
            | Error::Empty
            | Error::NotHermitian { .. }
            | Error::NotPositiveDefinite { .. }
            | Error::NotCommuting { .. } => CliError::Validation(e.to_string()),
            Error::IllConditioned { .. }
            | Error::ConvergenceFailure { .. }
            | Error::NegativityViolation { .. }
            | Error::QuadratureNotConverged { .. } => CliError::Numerical(e.to_string()),
        }
    }

    pub fn context(self, what: &str) -> Self {
        match self {
            CliError::Validation(m) => CliError::Validation(format!("{what}: {m}")),
            CliError::Numerical(m) => CliError::Numerical(format!("{what}: {m}")),
            CliError::Io(m) => CliError::Io(format!("{what}: {m}")),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) | CliError::Io(_) => EXIT_VALIDATION,
            CliError::Numerical(_) => EXIT_NUMERICAL,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum Format {
    #[default]
    Text,
    Structured,
}

#[derive(Debug, Parser)]
#[command(name = "spgm", version, about = "Weighted spectral geometric means, divergences and barycenters")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Report format.
    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    pub format: Format,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute a two-variable mean of two matrix files.
    Mean(MeanArgs),
    /// Evaluate the divergence Phi(A, B).
    Divergence(DivergenceArgs),
    /// Solve for the divergence barycenter of several matrix files.
    Barycenter(BarycenterArgs),
    /// Run the property-verification suites.
    Verify(VerifyArgs),
    /// Generate random positive definite matrices.
    Gen(GenArgs),
}

#[derive(Debug, Args)]
pub struct MeanArgs {
    /// arithmetic, harmonic, geometric, spectral, f, renyi, wasserstein or logeuclidean.
    pub kind: String,
    pub a: PathBuf,
    pub b: PathBuf,
    #[arg(long)]
    pub t: f64,
    /// Order parameter of the renyi mean.
    #[arg(long)]
    pub z: Option<f64>,
    /// Write the result matrix here.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DivergenceArgs {
    pub a: PathBuf,
    pub b: PathBuf,
    #[arg(long)]
    pub t: f64,
}

#[derive(Debug, Args)]
pub struct BarycenterArgs {
    #[arg(required = true)]
    pub files: Vec<PathBuf>,
    #[arg(long)]
    pub t: f64,
    /// Comma-separated weights; uniform when omitted.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub weights: Option<Vec<f64>>,
    #[arg(long, default_value_t = 500)]
    pub max_iters: usize,
    #[arg(long, default_value_t = 1e-9)]
    pub grad_tol: f64,
    /// Quadrature nodes for --check.
    #[arg(long, default_value_t = 256)]
    pub nodes: usize,
    /// Re-verify stationarity through the integral form of the gradient.
    #[arg(long)]
    pub check: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// properties, order, divergence, barycenter or all.
    #[arg(long, default_value = "all")]
    pub suite: String,
    /// A dimension, a list `2,3,5` or a range `2..6` (inclusive).
    #[arg(long, default_value = "2..6")]
    pub dims: String,
    #[arg(long, default_value_t = 200)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Write counterexample replay bundles here.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Multiplier on every tolerance (harness self-test).
    #[arg(long, hide = true, default_value_t = 1.0, allow_negative_numbers = true)]
    pub tolerance_scale: f64,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long)]
    pub dim: usize,
    #[arg(long, default_value_t = 10.0)]
    pub cond: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1)]
    pub count: usize,
    /// Output file; with --count > 1 an index is appended to the file stem.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// A finished command: its report and exit code.
pub struct Outcome {
    pub report: RunReport,
    pub exit: i32,
    /// Printed instead of the report (used by `gen` without `--out`).
    pub raw_output: Option<String>,
}

impl Outcome {
    fn ok(report: RunReport) -> Self {
        Self {
            report,
            exit: 0,
            raw_output: None,
        }
    }
}

pub fn run(cli: &Cli, argv: Vec<String>) -> Result<Outcome, CliError> {
    let report = RunReport::new(argv);
    match &cli.command {
        Command::Mean(a) => commands::mean(a, report),
        Command::Divergence(a) => commands::divergence(a, report),
        Command::Barycenter(a) => commands::barycenter(a, report),
        Command::Verify(a) => commands::verify(a, report),
        Command::Gen(a) => commands::gen(a, report),
    }
}

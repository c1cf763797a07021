//! `stepsi`: selective inference for stepwise selection from the command line.

mod commands;
mod ingest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Failure classes and their exit codes: 2 for input and flag problems,
/// 3 for numerical failures.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid flags: {0}")]
    Flags(String),
    #[error(transparent)]
    Core(#[from] stepwise_si::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("oracle mismatch: {0}")]
    Mismatch(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        use stepwise_si::Error as E;
        match self {
            CliError::Parse(_) | CliError::Flags(_) | CliError::Io(_) | CliError::Csv(_) => 2,
            CliError::Core(E::InvalidSpec(_) | E::InvalidConfig(_) | E::InvalidK { .. } | E::InvalidDataset(_) | E::FeatureNotSelected(_)) => 2,
            CliError::Core(_) | CliError::Mismatch(_) => 3,
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "stepsi", version, about = "Selective p-values and confidence intervals after stepwise feature selection")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Select features on a CSV file and report selective inference for each.
    Analyze(AnalyzeArgs),
    /// Monte-Carlo experiment on synthetic data.
    Experiment(ExperimentArgs),
    /// Homotopy versus enumeration timing and breakpoint counts.
    Bench(BenchArgs),
    /// Cross-check homotopy regions against brute-force oracles.
    OracleCheck(OracleArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SelectorArg {
    Sfs,
    Fbsfs,
}

#[derive(Args, Debug, Clone)]
pub struct AnalyzeArgs {
    /// CSV with header x1..xp,y.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value = "sfs")]
    pub selector: SelectorArg,
    #[arg(long, default_value_t = 3)]
    pub k: usize,
    /// Choose K among these by cross-validation (e.g. `3,6,9` or `1-10`).
    #[arg(long)]
    pub k_candidates: Option<String>,
    /// homotopy, homotopy-h, homotopy-s, polytope, ds (sfs); homotopy, quadratic (fbsfs).
    #[arg(long, default_value = "homotopy")]
    pub mode: String,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    /// Noise variance; Sigma = sigma2 * I.
    #[arg(long, default_value_t = 1.0)]
    pub sigma2: f64,
    /// Headerless n x n noise covariance, overriding --sigma2.
    #[arg(long)]
    pub sigma_file: Option<PathBuf>,
    /// Seed for data splitting and fold assignment.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 5)]
    pub folds: usize,
    /// Output CSV; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Kind {
    Fpr,
    Tpr,
    Ci,
    Robustness,
    Cv,
    Bench,
}

#[derive(Args, Debug, Clone)]
pub struct ExperimentArgs {
    #[arg(value_enum)]
    pub kind: Kind,
    #[arg(long, value_enum, default_value = "sfs")]
    pub selector: SelectorArg,
    /// Comma-separated methods; all methods of the selector when absent.
    #[arg(long)]
    pub mode: Option<String>,
    #[arg(long, default_value_t = 100)]
    pub n: usize,
    #[arg(long, default_value_t = 5)]
    pub p: usize,
    #[arg(long, default_value_t = 3)]
    pub k: usize,
    /// Candidate sets for `cv`; repeat the flag to compare several.
    #[arg(long)]
    pub k_candidates: Vec<String>,
    /// Comma-separated coefficients; defaults to zero for fpr, robustness
    /// and cv, and to 0.25 on the first floor(p/2) features otherwise.
    #[arg(long)]
    pub beta: Option<String>,
    /// gaussian, laplace, skew_normal(shape), student_t(df).
    #[arg(long)]
    pub noise: Option<String>,
    #[arg(long, default_value_t = 1.0)]
    pub sigma2: f64,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 5)]
    pub folds: usize,
    /// Directory receiving summary.csv and trials.csv; summary to standard
    /// output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct BenchArgs {
    #[arg(long, default_value_t = 50)]
    pub n: usize,
    #[arg(long, default_value_t = 10)]
    pub p: usize,
    /// Largest K; every K from 1 is measured.
    #[arg(long, default_value_t = 8)]
    pub k: usize,
    /// Instances per K.
    #[arg(long, default_value_t = 50)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct OracleArgs {
    /// CSV input; a synthetic instance is drawn when absent.
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "sfs")]
    pub selector: SelectorArg,
    #[arg(long, default_value_t = 3)]
    pub k: usize,
    #[arg(long, default_value_t = 20)]
    pub n: usize,
    #[arg(long, default_value_t = 5)]
    pub p: usize,
    #[arg(long, default_value_t = 1.0)]
    pub sigma2: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Grid step as a multiple of the statistic's standard deviation.
    #[arg(long, default_value_t = 1e-3)]
    pub step: f64,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Analyze(a) => commands::analyze(&a),
        Command::Experiment(a) => commands::experiment(&a),
        Command::Bench(a) => commands::bench(&a),
        Command::OracleCheck(a) => commands::oracle_check(&a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("stepsi: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

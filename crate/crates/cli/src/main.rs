mod commands;
mod files;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use magframe::filterbank::BankName;
use magframe::framelet::{Mode, DEFAULT_CHEB_DEGREE, DEFAULT_LEVELS};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("verification failed")]
    VerifyFailed,
    #[error(transparent)]
    Data(#[from] magframe::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::VerifyFailed => 1,
            CliError::Usage(_) => 2,
            CliError::Data(magframe::Error::NonFiniteLoss { .. }) => 4,
            CliError::Data(_) => 3,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Data(e.into())
    }
}

#[derive(Debug, Parser)]
#[command(name = "magframe", version, about = "Magnetic framelet transforms and Framelet-MagNet experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Framelet coefficients of a signal as CSV.
    Transform(TransformArgs),
    /// Inverse of `transform`: signal CSV from a coefficient dump.
    Reconstruct(ReconstructArgs),
    /// Numerical health checks of a transform; exits 1 on failure.
    Verify(VerifyArgs),
    /// Run an experiment config; prints the report JSON.
    Train(TrainArgs),
    /// Accuracy against feature-noise level for the framelet model and GCN.
    Denoise(DenoiseArgs),
    /// Framelet atoms centred at nodes, as CSV.
    Atoms(AtomsArgs),
}

fn charge(s: &str) -> Result<f64, String> {
    let q: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if (0.0..=magframe::graph::MAX_CHARGE).contains(&q) {
        Ok(q)
    } else {
        Err(format!("q must lie in [0, {}]", magframe::graph::MAX_CHARGE))
    }
}

#[derive(Debug, Clone, Args)]
struct BankArgs {
    #[arg(long, default_value = "haar")]
    bank: BankName,
    #[arg(long, default_value_t = magframe::filterbank::DEFAULT_SIGMOID_ALPHA)]
    sigmoid_alpha: f64,
}

#[derive(Debug, Clone, Args)]
struct SystemArgs {
    /// Edge list file.
    #[arg(long)]
    graph: PathBuf,
    #[command(flatten)]
    bank: BankArgs,
    #[arg(long, default_value_t = 0.25, value_parser = charge)]
    q: f64,
    #[arg(long, default_value_t = DEFAULT_LEVELS)]
    levels: usize,
    /// exact or chebyshev
    #[arg(long, default_value = "exact")]
    mode: Mode,
    #[arg(long, default_value_t = DEFAULT_CHEB_DEGREE)]
    cheb_degree: usize,
}

#[derive(Debug, Args)]
struct TransformArgs {
    #[command(flatten)]
    system: SystemArgs,
    /// N rows of one (real) or two (real, imaginary) columns.
    #[arg(long)]
    signal: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ReconstructArgs {
    #[command(flatten)]
    system: SystemArgs,
    /// Coefficient CSV written by `transform`.
    #[arg(long)]
    coeffs: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
#[command(group = clap::ArgGroup::new("source").required(true).args(["graph", "laplacian"]))]
struct VerifyArgs {
    #[arg(long)]
    graph: Option<PathBuf>,
    /// A Laplacian given as `row,col,real,imag` triplets instead of a graph.
    #[arg(long)]
    laplacian: Option<PathBuf>,
    #[command(flatten)]
    bank: BankArgs,
    #[arg(long, default_value_t = 0.25, value_parser = charge)]
    q: f64,
    #[arg(long, default_value_t = DEFAULT_LEVELS)]
    levels: usize,
}

#[derive(Debug, Clone, Args)]
struct ExperimentArgs {
    /// Experiment config JSON.
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    n_repeats: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    bank: Option<BankName>,
    #[arg(long)]
    sigmoid_alpha: Option<f64>,
    /// Repeats run in parallel.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

#[derive(Debug, Args)]
struct TrainArgs {
    #[command(flatten)]
    experiment: ExperimentArgs,
    /// Report path; stdout when absent.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Where to save the checkpoint of the best repeat.
    #[arg(long)]
    checkpoint: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct DenoiseArgs {
    #[command(flatten)]
    experiment: ExperimentArgs,
    #[arg(long, value_delimiter = ',', required = true, num_args = 1..)]
    sigmas: Vec<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct AtomsArgs {
    #[arg(long)]
    graph: PathBuf,
    #[command(flatten)]
    bank: BankArgs,
    #[arg(long, default_value_t = 0.25, value_parser = charge)]
    q: f64,
    #[arg(long, default_value_t = 1)]
    level: usize,
    /// Centre nodes; all nodes when absent.
    #[arg(long, value_delimiter = ',')]
    nodes: Vec<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Transform(a) => commands::transform(&a),
        Command::Reconstruct(a) => commands::reconstruct(&a),
        Command::Verify(a) => commands::verify(&a),
        Command::Train(a) => commands::train(&a),
        Command::Denoise(a) => commands::denoise(&a),
        Command::Atoms(a) => commands::atoms(&a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use sepvol_core::{Case, JacobianMode, PathKind, SequenceKind};

#[derive(Debug, Parser)]
#[command(name = "sepvol", version, about = "Separable-volume estimation for two-qubit states")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample the cube and write f(mu) estimates on a grid.
    EstimateF(EstimateArgs),
    /// Integrate a written f table against the jacobian.
    Integrate(IntegrateArgs),
    /// Tabulate the jacobian for plotting.
    Jacobian(JacobianArgs),
    /// Run the self-check suite.
    Validate(ValidateArgs),
}

/// Flags shared by commands that take a run configuration.
#[derive(Debug, Default, Args)]
pub struct RunArgs {
    /// TOML file with run configuration keys; flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub case: Option<Case>,
    #[arg(long)]
    pub points: Option<u64>,
    /// Number of equally spaced grid values on [0, 1].
    #[arg(long)]
    pub grid: Option<usize>,
    /// Additional grid values, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub extra_mu: Option<Vec<f64>>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub sequence: Option<SequenceKind>,
    #[arg(long)]
    pub skip: Option<u64>,
    #[arg(long)]
    pub path: Option<PathKind>,
    #[arg(long)]
    pub workers: Option<usize>,
    #[arg(long)]
    pub switch_point: Option<f64>,
    #[arg(long)]
    pub series_degree: Option<usize>,
    #[arg(long)]
    pub interp_degree: Option<usize>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Points between checkpoints (0 disables).
    #[arg(long)]
    pub checkpoint_every: Option<u64>,
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    #[command(flatten)]
    pub run: RunArgs,
    /// Continue from the checkpoint in the output directory.
    #[arg(long)]
    pub resume: bool,
    /// Stop after writing this many checkpoints, as if interrupted.
    #[arg(long, hide = true)]
    pub abort_after_checkpoints: Option<usize>,
}

#[derive(Debug, Args)]
pub struct IntegrateArgs {
    /// CSV written by estimate-f; its JSON sidecar must sit next to it.
    pub table: PathBuf,
    #[command(flatten)]
    pub run: RunArgs,
}

#[derive(Debug, Args)]
pub struct JacobianArgs {
    #[arg(long, default_value = "real")]
    pub case: Case,
    /// Number of grid values.
    #[arg(long, default_value_t = 1001)]
    pub grid: usize,
    /// First grid value; defaults to 1/grid.
    #[arg(long)]
    pub from: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    pub to: f64,
    #[arg(long, default_value = "stable")]
    pub mode: JacobianMode,
    #[arg(long, default_value_t = sepvol_core::jacobian::DEFAULT_SWITCH_POINT)]
    pub switch_point: f64,
    #[arg(long, default_value_t = sepvol_core::jacobian::DEFAULT_SERIES_DEGREE)]
    pub series_degree: usize,
    /// Write the CSV here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[arg(long, default_value_t = 1_000_000)]
    pub points_real: u64,
    #[arg(long, default_value_t = 4_000_000)]
    pub points_complex: u64,
    /// Random cases per oracle check.
    #[arg(long, default_value_t = 10_000)]
    pub oracle_cases: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub workers: Option<usize>,
    /// Multiply the normalization constant (fault injection).
    #[arg(long, default_value_t = 1.0)]
    pub normalization_scale: f64,
    /// Print the report as JSON.
    #[arg(long)]
    pub json: bool,
    /// Also write the JSON report to this file.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

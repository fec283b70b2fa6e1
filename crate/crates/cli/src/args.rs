// SPDX-License-Identifier: MIT OR Apache-2.0

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use cpwalk_core::ScoreKind;

#[derive(Debug, Parser)]
#[command(
    name = "cpwalk",
    version,
    about = "Change-point estimation with a likelihood-weighted random walk"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Estimate the change point of one series (JSON out).
    Detect(DetectArgs),
    /// Monte Carlo risk of the MLE and walk estimators over a grid of scenarios.
    Simulate(SimulateArgs),
    /// Error table over change points {n/6, ..., 5n/6}.
    Table(TableArgs),
    /// Daily W series from per-minute OHLC bars.
    Ingest(IngestArgs),
    /// Embedded estimates of every replicate as a point cloud.
    Scatter(ScatterArgs),
    /// Parametric bootstrap risk of both estimators on an observed series.
    Bootstrap(BootstrapArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Score {
    Likelihood,
    Cusum,
    Sn,
}

impl From<Score> for ScoreKind {
    fn from(s: Score) -> Self {
        match s {
            Score::Likelihood => ScoreKind::GaussianLikelihood,
            Score::Cusum => ScoreKind::Cusum,
            Score::Sn => ScoreKind::SelfNormalized,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Which {
    Cusum,
    #[value(name = "self-normalized", alias = "sn")]
    SelfNormalized,
}

#[derive(Debug, Args)]
pub struct DetectArgs {
    /// Series file: `date,w` CSV, or one value per line. `-` reads stdin.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Known noise scale; plugged in from the data when absent.
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long, value_enum, default_value = "likelihood")]
    pub score: Score,
    /// Restrict a dated input to one calendar year.
    #[arg(long)]
    pub year: Option<i32>,
}

/// Flags shared by the Monte Carlo jobs.
#[derive(Debug, Args)]
pub struct MonteCarlo {
    #[arg(long, default_value_t = 10_000)]
    pub replicates: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Worker threads; output does not depend on this.
    #[arg(long)]
    pub workers: Option<usize>,
    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,
    /// Estimate sigma from each replicate instead of handing over the true one.
    #[arg(long, conflicts_with = "known_sigma")]
    pub plug_in: bool,
    /// Hand the generating sigma to the estimators.
    #[arg(long)]
    pub known_sigma: bool,
}

impl MonteCarlo {
    /// Whether estimators see the true sigma, given the job's default.
    pub fn resolve_known(&self, default_known: bool) -> bool {
        if self.plug_in {
            false
        } else if self.known_sigma {
            true
        } else {
            default_known
        }
    }
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Sample sizes (comma separated).
    #[arg(long, value_delimiter = ',', default_value = "100")]
    pub n: Vec<usize>,
    /// True change indices (comma separated); 0 means no change.
    #[arg(long, value_delimiter = ',', default_value = "0")]
    pub r: Vec<usize>,
    /// Shifts in sigma units (comma separated).
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "0",
        allow_negative_numbers = true
    )]
    pub delta: Vec<f64>,
    /// Score fed to the walk.
    #[arg(long, value_enum, default_value = "likelihood")]
    pub score: Score,
    /// Score whose argmax is the baseline; defaults to `--score`.
    #[arg(long, value_enum)]
    pub baseline: Option<Score>,
    #[command(flatten)]
    pub mc: MonteCarlo,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TableArgs {
    #[arg(long, value_enum)]
    pub which: Which,
    #[arg(long, default_value_t = 300)]
    pub n: usize,
    /// Change points; defaults to n/6, 2n/6, ..., 5n/6.
    #[arg(long, value_delimiter = ',')]
    pub r: Vec<usize>,
    /// Shifts; defaults to 0.5,0.9 for cusum and 0.25,0.35 for self-normalized.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub delta: Vec<f64>,
    /// Walk score of the proposed column; defaults to cusum for the cusum
    /// table and likelihood for the self-normalized one. The self-normalized
    /// table plugs sigma in by default, the cusum table hands it over.
    #[arg(long, value_enum)]
    pub score: Option<Score>,
    #[command(flatten)]
    pub mc: MonteCarlo,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    /// Minute-bar CSV (`unix,date,symbol,open,high,low,close,...`).
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long)]
    pub year: Option<i32>,
    /// Per-day quality report (CSV).
    #[arg(long)]
    pub quality: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ScatterArgs {
    #[arg(long, default_value_t = 100)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub r: usize,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub delta: f64,
    #[arg(long, value_enum, default_value = "likelihood")]
    pub score: Score,
    #[arg(long, value_enum)]
    pub baseline: Option<Score>,
    #[command(flatten)]
    pub mc: MonteCarlo,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BootstrapArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub year: Option<i32>,
    #[arg(long, default_value_t = 10_000)]
    pub replicates: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long)]
    pub workers: Option<usize>,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

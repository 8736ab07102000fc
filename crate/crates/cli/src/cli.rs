use std::path::PathBuf;

use bandlab_core::truncation::{
    DEFAULT_BASE_BANDWIDTH, DEFAULT_EPSILON, DEFAULT_ETA, DEFAULT_MIN_P, DEFAULT_TOP_K,
    DEFAULT_TOP_P,
};
use bandlab_core::{Strategy, StrategyConfig};
use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(
    name = "bandlab",
    version,
    about = "Truncation sampling case studies and simulated decoding experiments"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Apply truncation strategies to a next-token distribution file.
    Truncate(TruncateArgs),
    /// Simulate one decoding run and write per-step metrics as CSV.
    Trajectory(TrajectoryArgs),
    /// Run several strategies over paired seeds and write a JSON summary.
    Compare(CompareArgs),
    /// Sweep Top-b bandwidth against temperature and write a CSV grid.
    Sweep(SweepArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StrategyName {
    TopB,
    TopK,
    TopP,
    MinP,
    Epsilon,
    Eta,
    Temperature,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Table,
    Json,
    Csv,
}

/// Strategy selection and hyperparameters. A hyperparameter flag only
/// affects the strategy it belongs to.
#[derive(Debug, Clone, Args)]
pub struct StrategyFlags {
    /// Strategies to run (repeatable or comma-separated).
    #[arg(long = "strategy", value_enum, value_delimiter = ',')]
    pub strategies: Vec<StrategyName>,
    /// Top-b base bandwidth, in (0, 1).
    #[arg(long)]
    pub base_bandwidth: Option<f64>,
    /// Top-k cutoff, >= 1.
    #[arg(long)]
    pub k: Option<usize>,
    /// Top-p cumulative mass, in (0, 1].
    #[arg(long)]
    pub p: Option<f64>,
    /// Min-p relative floor, in (0, 1].
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Epsilon absolute floor, in (0, 1).
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Eta entropy-adaptive floor, in (0, 1).
    #[arg(long)]
    pub eta: Option<f64>,
    /// Sampling temperature applied before truncation.
    #[arg(long, default_value_t = 1.0)]
    pub temperature: f64,
}

impl StrategyFlags {
    /// Builds validated configs, falling back to `defaults` when no
    /// `--strategy` was given.
    pub fn configs(&self, defaults: &[StrategyName]) -> Result<Vec<StrategyConfig>, CliError> {
        let names = if self.strategies.is_empty() {
            defaults
        } else {
            &self.strategies[..]
        };
        names
            .iter()
            .map(|name| {
                let strategy = match name {
                    StrategyName::TopB => Strategy::TopB {
                        base_bandwidth: self.base_bandwidth.unwrap_or(DEFAULT_BASE_BANDWIDTH),
                    },
                    StrategyName::TopK => Strategy::TopK {
                        k: self.k.unwrap_or(DEFAULT_TOP_K),
                    },
                    StrategyName::TopP => Strategy::TopP {
                        p: self.p.unwrap_or(DEFAULT_TOP_P),
                    },
                    StrategyName::MinP => Strategy::MinP {
                        alpha: self.alpha.unwrap_or(DEFAULT_MIN_P),
                    },
                    StrategyName::Epsilon => Strategy::Epsilon {
                        epsilon: self.epsilon.unwrap_or(DEFAULT_EPSILON),
                    },
                    StrategyName::Eta => Strategy::Eta {
                        eta: self.eta.unwrap_or(DEFAULT_ETA),
                    },
                    StrategyName::Temperature => Strategy::TemperatureOnly,
                };
                let config = StrategyConfig::new(strategy).with_temperature(self.temperature);
                config.validate()?;
                Ok(config)
            })
            .collect()
    }
}

#[derive(Debug, Clone, Args)]
pub struct TruncateArgs {
    /// Distribution file (JSON).
    pub file: PathBuf,
    #[command(flatten)]
    pub strategy: StrategyFlags,
    #[arg(long, value_enum, default_value_t = OutputFormat::Table)]
    pub format: OutputFormat,
    /// Number of top tokens to print per strategy.
    #[arg(long, default_value_t = 3)]
    pub top: usize,
    /// Write to this file instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct TrajectoryArgs {
    /// Process config (JSON).
    pub config: PathBuf,
    #[command(flatten)]
    pub strategy: StrategyFlags,
    /// Sampling seed.
    #[arg(long, env = "BANDLAB_SEED", default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct CompareArgs {
    /// Process config (JSON).
    pub config: PathBuf,
    #[command(flatten)]
    pub strategy: StrategyFlags,
    /// Number of paired seeds (0..N).
    #[arg(long, default_value_t = 32)]
    pub seeds: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    /// Process config (JSON).
    pub config: PathBuf,
    /// Base bandwidths as start:stop:step (or a single value).
    #[arg(long, default_value = "0.1:0.5:0.1")]
    pub bandwidths: String,
    /// Comma-separated temperatures.
    #[arg(long, default_value = "1.0")]
    pub temperatures: String,
    /// Number of paired seeds per cell.
    #[arg(long, default_value_t = 32)]
    pub seeds: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

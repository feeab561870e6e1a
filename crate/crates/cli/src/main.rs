use std::path::PathBuf;

use anyhow::Result;
use clap::{Parser, Subcommand};

use netgp_cli::commands;
use netgp_cli::config::ExperimentConfig;

#[derive(Debug, Parser)]
#[command(
    name = "netgp",
    about = "GP classification, anomaly scoring, and survival analysis with network covariates"
)]
struct Cli {
    #[command(subcommand)]
    task: Task,
}

#[derive(Debug, Clone, Parser)]
struct CommonArgs {
    /// Experiment configuration (TOML).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed; overrides the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory; overrides the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Dataset directory; overrides the config.
    #[arg(long)]
    dataset: Option<PathBuf>,
    /// Kernel method (gp-f, gp-lambda, gp-rw); overrides the config.
    #[arg(long)]
    method: Option<String>,
    /// Replicate count; overrides the config.
    #[arg(long)]
    replicates: Option<usize>,
    /// Sweep count; overrides the config.
    #[arg(long)]
    ns: Option<usize>,
}

#[derive(Debug, Subcommand)]
enum Task {
    /// Generate a synthetic dataset directory.
    Simulate(CommonArgs),
    /// Compute and cache a pairwise graph distance matrix.
    Distances(CommonArgs),
    /// Cross-validated binary classification.
    Classify(CommonArgs),
    /// One-class anomaly scores with elbow thresholds.
    Occ(CommonArgs),
    /// Semi-parametric survival analysis.
    Survival(CommonArgs),
}

impl CommonArgs {
    fn resolve(&self) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::from_file(path)?,
            None => ExperimentConfig::default(),
        };
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        if let Some(out) = &self.out {
            cfg.out = Some(out.clone());
        }
        if let Some(dataset) = &self.dataset {
            cfg.dataset = Some(dataset.clone());
        }
        if let Some(method) = &self.method {
            cfg.kernel.method = method.clone();
        }
        if let Some(replicates) = self.replicates {
            cfg.eval.replicates = replicates;
        }
        if let Some(ns) = self.ns {
            cfg.sampler.ns = ns;
        }
        Ok(cfg)
    }
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    match &cli.task {
        Task::Simulate(args) => commands::cmd_simulate(&args.resolve()?)?,
        Task::Distances(args) => commands::cmd_distances(&args.resolve()?)?,
        Task::Classify(args) => {
            commands::cmd_classify(&args.resolve()?)?;
        }
        Task::Occ(args) => {
            commands::cmd_occ(&args.resolve()?)?;
        }
        Task::Survival(args) => commands::cmd_survival(&args.resolve()?)?,
    }
    Ok(())
}

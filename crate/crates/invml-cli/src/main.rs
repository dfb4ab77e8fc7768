//! `invml`: train, evaluate, and probe invertible manifold encoders from
//! the command line.
//!
//! Exit codes: 0 success, 2 configuration error, 3 numeric failure, 4 I/O
//! failure.

mod commands;
mod config;
mod plot;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use commands::CmdResult;
use config::{apply_profile, apply_quick, load_config, validate, ExperimentConfig};

#[derive(Parser)]
#[command(name = "invml", version, about = "Invertible manifold learning encoder")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Flags shared by every subcommand.
#[derive(Args)]
struct Common {
    /// Config file (flat sectioned key = value); a run manifest also works.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides both the data seed and the training seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Named dataset profile (swissroll, spheres, halfspheres, usps,
    /// mnist256, mnist784, kmnist, fmnist, coil20).
    #[arg(long)]
    profile: Option<String>,
    /// Smoke-test mode: 5x fewer epochs and samples.
    #[arg(long)]
    quick: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic dataset and write it as CSV.
    Generate {
        #[command(flatten)]
        common: Common,
    },
    /// Train an encoder; writes model.ckpt, history.csv, and manifest.txt.
    Train {
        #[command(flatten)]
        common: Common,
    },
    /// Compute the metric suite for a trained encoder.
    Evaluate {
        #[command(flatten)]
        common: Common,
        /// Checkpoint to evaluate; defaults to <out>/model.ckpt.
        #[arg(long)]
        checkpoint: Option<PathBuf>,
    },
    /// Latent interpolation: per-k MSE curve and a geodesic path.
    Interpolate {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        /// Number of geodesic segments between the distant pair.
        #[arg(long, default_value_t = 4)]
        segments: usize,
    },
    /// Train once per loss-term combination and tabulate the metrics.
    Ablate {
        #[command(flatten)]
        common: Common,
    },
    /// Invert the compression head (least-squares or sparse) and report
    /// the reconstruction error.
    Reconstruct {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        /// Head inversion method: ls | sparse.
        #[arg(long, default_value = "ls")]
        method: String,
        /// Support size per sample for sparse recovery.
        #[arg(long, default_value_t = 3)]
        sparsity: usize,
    },
}

/// Resolution order: defaults, then --profile, then the config file (which
/// may itself name a profile), then --seed, then --quick.
fn resolve(common: &Common) -> CmdResult<ExperimentConfig> {
    let mut config = ExperimentConfig::default();
    if let Some(profile) = &common.profile {
        apply_profile(&mut config, profile)?;
    }
    if let Some(path) = &common.config {
        config = load_config(path, config)?;
    }
    if let Some(seed) = common.seed {
        config.seed = seed;
        config.data_seed = seed;
    }
    if common.quick {
        apply_quick(&mut config);
    }
    validate(&config)?;
    Ok(config)
}

fn run(cli: Cli) -> CmdResult<()> {
    match &cli.command {
        Command::Generate { common } => {
            let config = resolve(common)?;
            commands::cmd_generate(&config, &common.out)
        }
        Command::Train { common } => {
            let config = resolve(common)?;
            commands::cmd_train(&config, &common.out)
        }
        Command::Evaluate { common, checkpoint } => {
            let config = resolve(common)?;
            commands::cmd_evaluate(&config, &common.out, checkpoint.as_deref())
        }
        Command::Interpolate { common, checkpoint, segments } => {
            let config = resolve(common)?;
            commands::cmd_interpolate(&config, &common.out, checkpoint.as_deref(), *segments)
        }
        Command::Ablate { common } => {
            let config = resolve(common)?;
            commands::cmd_ablate(&config, &common.out)
        }
        Command::Reconstruct { common, checkpoint, method, sparsity } => {
            let config = resolve(common)?;
            commands::cmd_reconstruct(
                &config,
                &common.out,
                checkpoint.as_deref(),
                method,
                *sparsity,
            )
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

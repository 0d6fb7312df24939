//! Batch front end for the swarm stability laboratory.
//!
//! Exit codes: 0 success, 1 check failure, 2 usage/configuration error,
//! 3 numerical abort.

mod commands;
mod config;
mod manifest;

use anyhow::Result;
use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;
use swarmlab_core::integrate::IntegrateError;
use swarmlab_core::model::ModelError;

#[derive(Parser)]
#[command(name = "swarmlab", version, about = "Self-propelled swarm stability laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate one configured system and write a trajectory CSV.
    Simulate {
        /// Config file (TOML); see the README for the schema.
        #[arg(long, conflicts_with = "preset")]
        config: Option<PathBuf>,
        /// Built-in configuration: figure2, figure6, sweep-default.
        #[arg(long)]
        preset: Option<String>,
        /// Override the seed in the config.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Print the quadratic manifold map and its residuals.
    Reduce,
    /// Run a named check suite; nonzero exit iff a check fails.
    Verify {
        /// One of: spectra, manifold, means, antiderivatives, exact,
        /// consistency, properties, sharpness, stability, decay,
        /// decay-stated, all.
        suite: String,
    },
    /// Fan decay-rate runs over the configured grid and aggregate fits.
    Sweep {
        #[arg(long, conflicts_with = "preset")]
        config: Option<PathBuf>,
        #[arg(long)]
        preset: Option<String>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Worker pool size (defaults to the core count).
        #[arg(long)]
        workers: Option<usize>,
    },
}

fn load_config(
    config: &Option<PathBuf>,
    preset: &Option<String>,
    seed: Option<u64>,
) -> Result<config::RunConfig> {
    let mut cfg = match (config, preset) {
        (Some(path), None) => config::RunConfig::load(path)?,
        (None, Some(name)) => config::preset(name)?,
        (None, None) => anyhow::bail!("pass --config PATH or --preset NAME"),
        (Some(_), Some(_)) => unreachable!("clap rejects the combination"),
    };
    if let Some(seed) = seed {
        cfg.run.seed = seed;
    }
    Ok(cfg)
}

fn dispatch(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Simulate { config, preset, seed, out } => {
            let cfg = load_config(&config, &preset, seed)?;
            commands::simulate::run(&cfg, &out)?;
            Ok(0)
        }
        Command::Reduce => commands::reduce::run(),
        Command::Verify { suite } => commands::verify::run(&suite),
        Command::Sweep { config, preset, seed, out, workers } => {
            let cfg = load_config(&config, &preset, seed)?;
            commands::sweep::run(&cfg, &out, workers)?;
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version are not errors.
            if e.use_stderr() {
                eprint!("{e}");
                return ExitCode::from(2);
            }
            print!("{e}");
            return ExitCode::SUCCESS;
        }
    };
    match dispatch(cli) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            let numerical = err.chain().any(|c| {
                c.downcast_ref::<IntegrateError>().is_some()
                    || matches!(
                        c.downcast_ref::<ModelError>(),
                        Some(ModelError::SingularFrame { .. })
                    )
            });
            ExitCode::from(if numerical { 3 } else { 2 })
        }
    }
}

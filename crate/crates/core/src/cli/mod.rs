//! Command-line front end of the `ctls` binary.
//!
//! Each subcommand reads a [`RunConfig`], does its work on a worker pool and
//! writes its files once at the end. Exit codes: 0 success, 2 bad config,
//! 3 resonant drive, 4 oracle integrity failure, 5 grid too coarse.

pub mod commands;
pub mod config;
pub mod output;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

pub use config::{Format, InitialKind, RunConfig};
pub use output::{fmt_f64, Sink, Table};

use crate::error::Error;

/// Environment variable that overrides the configured output directory.
pub const OUT_DIR_ENV: &str = "CTLS_OUT_DIR";

#[derive(Debug, Parser)]
#[command(name = "ctls", version, about = "Qubit dynamics under a driven coherent two-level defect")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// TOML run configuration; defaults apply to anything left out.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Output directory. Overrides $CTLS_OUT_DIR and the config file.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Worker threads; 0 or absent means one per logical core.
    #[arg(long, global = true)]
    pub workers: Option<usize>,

    /// Format of tabular output.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,

    /// Echo the resolved configuration to stdout before running.
    #[arg(long, global = true)]
    pub print_config: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Report every derived symbol with units.
    Derive,
    /// Closed-form mean, variance and energy, driven and undriven.
    Evolve,
    /// Brute-force master equation next to the closed form.
    Oracle,
    /// Q-distribution frames and the mean trajectory.
    Qdist,
    /// Phase labels over a detuning by drive grid.
    Phases,
    /// First-return map on the positive x-axis.
    Poincare,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Model(#[from] Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Model(e) => match e {
                Error::ResonantDrive => 3,
                Error::TraceDrift { .. } | Error::HermiticityLoss { .. } | Error::TruncationOverflow { .. } => 4,
                Error::GridTooCoarse { .. } => 5,
                Error::NonPositiveInput { .. } | Error::NonFinite { .. } | Error::InvalidArgument(_) => 2,
                _ => 1,
            },
            CliError::Io(_) => 1,
        }
    }
}

/// Applies command-line overrides and the environment to a config.
pub fn resolve(cli: &Cli, env_out: Option<String>) -> Result<RunConfig, CliError> {
    let mut config = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
            RunConfig::parse(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?
        }
        None => RunConfig::default(),
    };
    if let Some(dir) = cli.out.as_ref().map(|p| p.display().to_string()).or(env_out) {
        config.output.dir = Some(dir);
    }
    if let Some(format) = cli.format {
        config.output.format = format;
    }
    Ok(config)
}

pub fn dispatch(command: Command, config: &RunConfig, sink: &mut Sink) -> Result<serde_json::Value, CliError> {
    match command {
        Command::Derive => commands::cmd_derive(config, sink),
        Command::Evolve => commands::cmd_evolve(config, sink),
        Command::Oracle => commands::cmd_oracle(config, sink),
        Command::Qdist => commands::cmd_qdist(config, sink),
        Command::Phases => commands::cmd_phases(config, sink),
        Command::Poincare => commands::cmd_poincare(config, sink),
    }
}

/// Runs one command from an already parsed [`Cli`] and returns its summary
/// report.
pub fn run(cli: &Cli) -> Result<serde_json::Value, CliError> {
    let config = resolve(cli, std::env::var(OUT_DIR_ENV).ok())?;
    if cli.print_config {
        print!("{}", config.to_toml());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.workers.unwrap_or(0))
        .build()
        .map_err(|e| CliError::Config(format!("cannot start {} workers: {e}", cli.workers.unwrap_or(0))))?;
    let dir = PathBuf::from(config.output.dir.clone().unwrap_or_else(|| ".".into()));
    let mut sink = Sink::new(dir, config.output.format)?;
    pool.install(|| dispatch(cli.command, &config, &mut sink))
}

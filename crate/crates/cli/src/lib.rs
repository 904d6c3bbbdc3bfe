//! Batch front end: JSON config in, CSV tables and a JSON summary out.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use commands::CommandOutput;
pub use config::RunConfig;
pub use error::CliError;

/// Version of the summary document layout.
pub const SUMMARY_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Parser)]
#[command(
    name = "gravchan",
    version,
    about = "Gravitational phase transfer through an entangled atomic channel"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Direct and channel fringes over a phase grid.
    Fringe {
        #[command(flatten)]
        common: Common,
        /// CSV output path (overrides output.csv).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Shot- and phase-noise comparison with Monte Carlo checks.
    Noise {
        #[command(flatten)]
        common: Common,
        /// CSV output path (overrides output.csv).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Optimal channel amplitude.
    Optimize {
        #[command(flatten)]
        common: Common,
    },
    /// Channel preparation and fidelity check.
    Prepare {
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Debug, Args)]
pub struct Common {
    #[arg(long)]
    pub config: PathBuf,
    /// Overrides `seed`.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Overrides `remote_atom`.
    #[arg(long)]
    pub remote_atom: Option<usize>,
    /// Summary output path (overrides output.summary).
    #[arg(long)]
    pub summary: Option<PathBuf>,
}

fn load(common: &Common, out: Option<&PathBuf>) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(&common.config)
        .map_err(|e| CliError::Io(format!("{}: {e}", common.config.display())))?;
    let mut config = RunConfig::from_json(&text)?;
    if let Some(seed) = common.seed {
        config.seed = seed;
    }
    if let Some(r) = common.remote_atom {
        config.remote_atom = r;
    }
    if let Some(s) = &common.summary {
        config.output.summary = Some(s.clone());
    }
    if let Some(o) = out {
        config.output.csv = Some(o.clone());
    }
    Ok(config)
}

/// Computes the command's outputs without writing them.
pub fn execute(command: &Command) -> Result<CommandOutput, CliError> {
    match command {
        Command::Fringe { common, out } => commands::cmd_fringe(&load(common, out.as_ref())?),
        Command::Noise { common, out } => commands::cmd_noise(&load(common, out.as_ref())?),
        Command::Optimize { common } => commands::cmd_optimize(&load(common, None)?),
        Command::Prepare { common } => commands::cmd_prepare(&load(common, None)?),
    }
}

pub fn write_outputs(out: &CommandOutput) -> Result<(), CliError> {
    if let Some((path, text)) = &out.csv {
        output::write_atomic(path, text)?;
    }
    output::write_atomic(&out.summary_path, &output::to_pretty_json(&out.summary))
}

/// Sizes the global worker pool from `GRAVCHAN_THREADS` (unset or 0 = automatic).
pub fn configure_threads() -> Result<(), CliError> {
    let n = match std::env::var("GRAVCHAN_THREADS") {
        Ok(v) => v.trim().parse::<usize>().map_err(|_| {
            CliError::Config(format!("GRAVCHAN_THREADS must be a non-negative integer, got {v:?}"))
        })?,
        Err(_) => 0,
    };
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Internal(e.to_string()))
}

pub fn run(cli: &Cli) -> Result<PathBuf, CliError> {
    configure_threads()?;
    let out = execute(&cli.command)?;
    write_outputs(&out)?;
    Ok(out.summary_path)
}

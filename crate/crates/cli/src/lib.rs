//! Command-line scenario runner for the displacement-metrology model.
//!
//! `cqed-metrology <scenario> [--config FILE] [--set key=value ...]
//! [--seed N] [--out DIR] [--plot]` writes one CSV per panel, a `.meta`
//! sidecar next to each, and optionally an SVG plot.

pub mod config;
pub mod output;
pub mod scenarios;

use std::path::PathBuf;

use clap::Parser;
use cqed_metrology::Execution;

pub use config::{Grid, Scenario, ScenarioConfig};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("numerical guard: {0}")]
    Numerical(cqed_metrology::Error),
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<cqed_metrology::Error> for CliError {
    fn from(e: cqed_metrology::Error) -> Self {
        if e.is_numerical_guard() {
            CliError::Numerical(e)
        } else {
            CliError::Config(e.to_string())
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Io(_) => 4,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "cqed-metrology",
    version,
    about = "Regenerate displacement-metrology curves as CSV"
)]
pub struct Cli {
    pub scenario: Scenario,
    /// Key/value configuration file.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Override one configuration key (repeatable).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory, created if missing.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    /// Also write an SVG plot per panel.
    #[arg(long)]
    pub plot: bool,
}

/// Runs the scenario and returns every file written.
pub fn run(cli: &Cli) -> Result<Vec<PathBuf>, CliError> {
    let cfg = ScenarioConfig::resolve(cli.scenario, cli.config.as_deref(), &cli.set, cli.seed)?;
    let tables = scenarios::run(&cfg, Execution::default())?;
    std::fs::create_dir_all(&cli.out)
        .map_err(|e| CliError::Io(format!("{}: {e}", cli.out.display())))?;
    let mut written = Vec::new();
    for t in &tables {
        written.extend(output::write_table(&cli.out, t, &cfg, cli.plot)?);
    }
    Ok(written)
}

//! `blockfee` — deterministic runner for the fee-mechanism analyses.
//!
//! Subcommands: `weitzman`, `eip1559`, `bargain`, `sweep`. Each reads a
//! strict JSON config, derives all randomness from one seed, and writes
//! its outputs into the chosen directory. Exit codes: 0 success (including
//! sweep warnings), 2 configuration error, 3 numeric error.

mod commands;
mod config;
mod output;

use std::fmt;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::config::RunConfig;
use crate::output::OutputWriter;

#[derive(Debug)]
pub enum CliError {
    /// Bad configuration or I/O; exit code 2.
    Config(String),
    /// Numeric or solver failure while running; exit code 3.
    Numeric(String),
}

impl CliError {
    /// Core errors raised while interpreting the config are config errors.
    pub fn from_config_phase(e: blockfee_core::Error) -> CliError {
        CliError::Config(e.to_string())
    }

    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numeric(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(msg) => write!(f, "{msg}"),
            CliError::Numeric(msg) => write!(f, "{msg}"),
        }
    }
}

impl From<blockfee_core::Error> for CliError {
    fn from(e: blockfee_core::Error) -> Self {
        CliError::Numeric(e.to_string())
    }
}

#[derive(Parser)]
#[command(
    name = "blockfee",
    version,
    about = "Simulate and compare blockchain fee mechanisms: price control, quantity control, fixed price"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// Path to the JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Override the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory (overrides the config's output_dir; default ".").
    #[arg(long)]
    output: Option<PathBuf>,
    /// Worker thread count (default: available parallelism). Never
    /// changes results, only wall time.
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Optimal price/quantity instruments and the comparative advantage.
    Weitzman(CommonArgs),
    /// Base-fee trajectory simulation and statistics.
    Eip1559(CommonArgs),
    /// Nash bargaining over the mechanism family.
    Bargain(CommonArgs),
    /// Single-factor sweeps with directional verdicts.
    Sweep(SweepArgs),
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Run all five factors and emit the combined verdict report.
    #[arg(long)]
    all_factors: bool,
}

impl Command {
    fn common(&self) -> &CommonArgs {
        match self {
            Command::Weitzman(c) | Command::Eip1559(c) | Command::Bargain(c) => c,
            Command::Sweep(s) => &s.common,
        }
    }
}

fn run(cli: &Cli) -> Result<Vec<PathBuf>, CliError> {
    let args = cli.command.common();
    if let Some(n) = args.threads {
        // build the global pool once; later calls keep the first pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let text = fs::read_to_string(&args.config).map_err(|e| {
        CliError::Config(format!("cannot read config {}: {e}", args.config.display()))
    })?;
    let cfg = RunConfig::from_json(&text)?;
    let seed = args.seed.unwrap_or(cfg.seed);
    let out_dir = args
        .output
        .clone()
        .or_else(|| cfg.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("."));

    let mut resolved = cfg.clone();
    resolved.seed = seed;
    resolved.output_dir = Some(out_dir.clone());
    let mut writer = OutputWriter::new(&out_dir, &resolved, seed)?;

    match &cli.command {
        Command::Weitzman(_) => commands::cmd_weitzman(&cfg, seed, &mut writer)?,
        Command::Eip1559(_) => commands::cmd_eip1559(&cfg, seed, &mut writer)?,
        Command::Bargain(_) => commands::cmd_bargain(&cfg, seed, &mut writer)?,
        Command::Sweep(s) => commands::cmd_sweep(&cfg, seed, &mut writer, s.all_factors)?,
    }
    Ok(writer.written().to_vec())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(files) => {
            for f in files {
                println!("wrote {}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

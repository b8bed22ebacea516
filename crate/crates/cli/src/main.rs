//! `vbqc`: seeded experiment runner. Exit code 0 when every checked claim
//! holds, 1 when one is violated, 2 on bad input.

mod commands;
mod config;
mod report;

use clap::{Parser, Subcommand, ValueEnum};
use std::path::PathBuf;
use std::process::ExitCode;
use vbqc_core::Backend;

use config::{ExperimentConfig, UsageError};

#[derive(Parser, Debug)]
#[command(name = "vbqc", version, about = "Seeded experiments for trap-based verifiable blind quantum computation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// JSON experiment config (schema "vbqc-config/1").
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    samples: Option<usize>,
    /// Directory for report.json, summary.csv and per-command extras.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    backend: Option<BackendArg>,
    /// Print the JSON report instead of the summary table.
    #[arg(long, global = true)]
    json: bool,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    /// Pauli twirl residuals for random distinct Pauli pairs.
    Twirl,
    /// Worst-case and sampled shift acceptance of the signed polynomial code.
    Code,
    /// Localising protocol runs against a prover strategy.
    Localise,
    /// End-to-end hybrid runs, or a verifiability estimate under an attack.
    Hybrid,
    /// Communication counts over a computation-size grid, with fitted exponents.
    Scaling,
    /// Exhaustive prover-view comparison for pattern pairs.
    Blindness,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum BackendArg {
    Statevector,
    Frame,
}

fn resolve(cli: &Cli) -> Result<ExperimentConfig, UsageError> {
    let mut cfg = match &cli.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::empty(),
    };
    cfg.seed = cli.seed.or(cfg.seed);
    cfg.samples = cli.samples.or(cfg.samples);
    if let Some(b) = cli.backend {
        cfg.backend = Some(match b {
            BackendArg::Statevector => Backend::Statevector,
            BackendArg::Frame => Backend::Frame,
        });
    }
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<bool, UsageError> {
    let cfg = resolve(cli)?;
    let report = match cli.command {
        Command::Twirl => commands::twirl(cfg),
        Command::Code => commands::code(cfg),
        Command::Localise => commands::localise(cfg),
        Command::Hybrid => commands::hybrid(cfg),
        Command::Scaling => commands::scaling(cfg),
        Command::Blindness => commands::blindness(cfg),
    }?;
    if let Some(dir) = &cli.out {
        report.write_to(dir)?;
    }
    if cli.json {
        print!("{}", report.to_json());
    } else {
        print!("{}", report.table());
    }
    Ok(report.pass)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => e.exit(),
    };
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(UsageError(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

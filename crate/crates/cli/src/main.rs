//! Batch runner: every analysis as a subcommand, data to --out or stdout,
//! diagnostics to stderr.

mod commands;
mod config;
mod failure;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;

use config::{CapacityConfig, ClarkeConfig, GainConfig, KroneckerConfig, UmaConfig};
use failure::Failure;
use output::{emit, Format, Report};

#[derive(Parser)]
#[command(
    name = "holomimo",
    version,
    about = "2-D vs 3-D holographic MIMO array analyses"
)]
struct Cli {
    /// JSON run configuration; built-in defaults when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output file; standard output when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Overrides the Monte-Carlo trial count.
    #[arg(long, global = true)]
    trials: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Clarke-model diversity over spacing, height step and spread.
    Clarke,
    /// Pattern-correlation diversity and capacity per variant, relative to the first.
    Kronecker,
    /// Capacity sweep over spacing on a fixed aperture.
    Capacity,
    /// Realized gain cuts against the planar-aperture limit.
    Gain,
    /// Urban-macro drops comparing array variants.
    Uma,
    /// Validate a Touchstone file and report embedded efficiencies.
    ParseTouchstone { file: PathBuf },
}

fn finish<R: Serialize>(report: Report<R>, cli: &Cli) -> Result<(), Failure> {
    emit(&report.render(cli.format)?, cli.out.as_deref())
}

fn run(cli: &Cli) -> Result<(), Failure> {
    let path = cli.config.as_deref();
    match &cli.command {
        Command::Clarke => {
            let mut cfg: ClarkeConfig = config::load(path)?;
            if let Some(s) = cli.seed {
                cfg.seed = s;
            }
            finish(commands::clarke(&cfg)?, cli)
        }
        Command::Capacity => {
            let mut cfg: CapacityConfig = config::load(path)?;
            if let Some(s) = cli.seed {
                cfg.seed = s;
            }
            if let Some(t) = cli.trials {
                cfg.trials = t;
            }
            finish(commands::capacity(&cfg)?, cli)
        }
        Command::Kronecker => {
            let mut cfg: KroneckerConfig = config::load(path)?;
            if let Some(s) = cli.seed {
                cfg.seed = s;
            }
            if let Some(t) = cli.trials {
                cfg.trials = t;
            }
            finish(commands::kronecker(&cfg)?, cli)
        }
        Command::Gain => {
            let mut cfg: GainConfig = config::load(path)?;
            if let Some(s) = cli.seed {
                cfg.seed = s;
            }
            finish(commands::gain(&cfg)?, cli)
        }
        Command::Uma => {
            let mut cfg: UmaConfig = config::load(path)?;
            if let Some(s) = cli.seed {
                cfg.scenarios.iter_mut().for_each(|sc| sc.seed = s);
            }
            if let Some(t) = cli.trials {
                cfg.settings.capacity_trials = t;
            }
            finish(commands::uma(&cfg)?, cli)
        }
        Command::ParseTouchstone { file } => {
            if cli.config.is_some() {
                return Err(Failure::Config("parse-touchstone takes no --config".into()));
            }
            finish(
                commands::parse_touchstone_file(file, cli.seed.unwrap_or(0))?,
                cli,
            )
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("holomimo: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

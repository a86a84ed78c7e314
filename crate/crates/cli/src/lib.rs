//! The `adopt` command line: simulation, pricing, calibration, stylized
//! facts and backtests driven by a TOML run configuration.

pub mod commands;
pub mod config;
pub mod error;
pub mod ingest;
pub mod output;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

pub use config::RunConfig;
pub use error::{CliError, CliResult};
pub use ingest::{ingest_csv, IngestError};

#[derive(Debug, Parser)]
#[command(name = "adopt", version, about = "Advertising option pricing toolkit")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate risk-neutral price paths on the option grid
    Simulate {
        #[command(flatten)]
        common: CommonArgs,
        /// Number of paths (overrides `simulate.paths`)
        #[arg(long)]
        paths: Option<usize>,
    },
    /// Price the configured option by Monte Carlo and/or in closed form
    Price {
        #[command(flatten)]
        common: CommonArgs,
        /// Monte Carlo replications (overrides `pricing.paths`)
        #[arg(long)]
        z: Option<u64>,
    },
    /// Fit the jump-diffusion to each input history
    Calibrate {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Stylized-fact tests on the log returns of each input history
    Facts {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Seller-revenue backtest with one slot per input history
    Backtest {
        #[command(flatten)]
        common: CommonArgs,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// Price history CSV (`timestamp,price`); repeatable
    #[arg(long)]
    pub input: Vec<PathBuf>,
    /// TOML run configuration
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, default_value = "out")]
    pub out_dir: PathBuf,
    /// Format of tabular artifacts
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

impl CommonArgs {
    /// Defaults, then the config file, then flags.
    pub fn resolve(&self) -> CliResult<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        if !self.input.is_empty() {
            cfg.input = self.input.clone();
        }
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        Ok(cfg)
    }
}

/// Runs a parsed command and returns the paths written.
pub fn run(cli: Cli) -> CliResult<Vec<PathBuf>> {
    match cli.command {
        Command::Simulate { common, paths } => {
            let mut cfg = common.resolve()?;
            if let Some(n) = paths {
                cfg.simulate.paths = n;
            }
            commands::simulate(&cfg, &common.out_dir, common.format)
        }
        Command::Price { common, z } => {
            let mut cfg = common.resolve()?;
            if let Some(z) = z {
                cfg.pricing.paths = z;
            }
            commands::price(&cfg, &common.out_dir, common.format)
        }
        Command::Calibrate { common } => {
            commands::calibrate(&common.resolve()?, &common.out_dir, common.format)
        }
        Command::Facts { common } => commands::facts(&common.resolve()?, &common.out_dir, common.format),
        Command::Backtest { common } => {
            commands::backtest(&common.resolve()?, &common.out_dir, common.format)
        }
    }
}

/// Parses `args`, runs, reports errors on stderr and returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(cli) {
        Ok(_) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

//! `roughhedge` command-line driver.

mod commands;
mod config;

use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

/// Environment variable naming the default output directory.
pub const OUT_ENV: &str = "ROUGHHEDGE_OUT";

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Assertion(String),
    Core(roughhedge::Error),
}

impl From<roughhedge::Error> for CliError {
    fn from(e: roughhedge::Error) -> Self {
        CliError::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Core(e.into())
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        use roughhedge::Error as E;
        match self {
            CliError::Usage(_) => 64,
            CliError::Assertion(_) => 1,
            CliError::Core(e) => match e {
                E::NotSpanned { .. } | E::RankDeficient { .. } | E::ConvexityViolated { .. } => 2,
                E::Config(_) | E::Parse { .. } | E::Domain(_) | E::MissingDependency(_) | E::Io(_) => 64,
                _ => 1,
            },
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Assertion(m) => write!(f, "assertion failed: {m}"),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "roughhedge", version, about = "Rough-path gamma hedging experiments")]
pub struct Cli {
    /// Experiment configuration (TOML).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Base seed; overrides the seeds in the config.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads for convergence studies.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Output directory. Defaults to the config's `output`, then $ROUGHHEDGE_OUT, then `.`.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Assertion manifest (TOML `[[assert]]` tables).
    #[arg(long = "assert", global = true)]
    pub assert: Option<PathBuf>,
    /// Extra instrument catalog (TOML `[instruments.<name>]` tables).
    #[arg(long, global = true)]
    pub instruments: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Price and Greeks of one instrument, with identity checks.
    Greeks(commands::GreeksArgs),
    /// Run one hedge and write its wealth ledger.
    Hedge,
    /// Run a convergence study over meshes and seeds.
    Converge,
    /// Grid p-variation of a path CSV.
    Pvar {
        csv: PathBuf,
        #[arg(long, default_value_t = 2.0)]
        p: f64,
    },
    /// Running iterated integral of a path CSV.
    Signature {
        csv: PathBuf,
        /// Multi-index such as `1,0` (0 is time).
        #[arg(long)]
        alpha: String,
    },
    /// Generate a path and write it as CSV.
    Gen(commands::GenArgs),
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(64),
            };
        }
    };
    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("roughhedge: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

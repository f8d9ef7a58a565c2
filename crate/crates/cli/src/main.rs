//! `oscillon` command-line driver.

mod commands;
mod config;
mod io;
mod seed;
mod sweep;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::config::Config;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Numerical(#[from] oscillon::Error),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) | CliError::Io(_) => 3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Done,
    /// Output written but incomplete (e.g. a stalled branch).
    Partial,
}

#[derive(Debug, Parser)]
#[command(name = "oscillon", version, about = "Oscillons in a parametrically forced Ginzburg-Landau model")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// TOML configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,

    /// Seed: zero | flat | sech-weak | sech-strong | file:PATH.
    #[arg(long, global = true)]
    seed: Option<String>,

    /// SECTION.KEY=VALUE, applied after the config file.
    #[arg(long = "override", global = true)]
    overrides: Vec<String>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Time-step the PDE or the amplitude equation.
    Simulate,
    /// Continue a branch of steady (amplitude equation) or time-periodic (PDE) states.
    Continue,
    /// Critical forcing and eigenfunction of the damped Mathieu problem.
    Floquet {
        /// Also log the Floquet multipliers at the configured forcing.
        #[arg(long)]
        multipliers: bool,
    },
    /// Allen-Cahn reduction coefficients and sech seed parameters.
    Reduce,
    /// Uniform states of the amplitude equation.
    Flatstates,
    /// Time-stepping outcome map over (nu, parameter).
    Sweep,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Simulate => "simulate",
            Command::Continue => "continue",
            Command::Floquet { .. } => "floquet",
            Command::Reduce => "reduce",
            Command::Flatstates => "flatstates",
            Command::Sweep => "sweep",
        }
    }
}

fn run(cli: &Cli) -> Result<Status, CliError> {
    let mut overrides = cli.overrides.clone();
    if let Some(s) = &cli.seed {
        overrides.push(format!("run.seed=\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\"")));
    }
    let cfg = Config::load(cli.config.as_deref(), &overrides)?;
    io::ensure_dir(&cli.out)?;
    io::write_manifest(&cli.out, cli.command.name(), &cfg)?;
    match &cli.command {
        Command::Simulate => commands::simulate(&cfg, &cli.out),
        Command::Continue => commands::continuation(&cfg, &cli.out),
        Command::Floquet { multipliers } => commands::floquet(&cfg, &cli.out, *multipliers),
        Command::Reduce => commands::reduce(&cfg, &cli.out),
        Command::Flatstates => commands::flatstates(&cfg, &cli.out),
        Command::Sweep => sweep::sweep(&cfg, &cli.out),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(Status::Done) => ExitCode::SUCCESS,
        Ok(Status::Partial) => ExitCode::from(4),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

// SPDX-License-Identifier: Apache-2.0

//! `cprsim` command-line front end.
//!
//! Exit codes: 0 success, 1 invalid input, 2 numerical failure, 3 I/O failure.

mod error;
mod manifest;
mod run;
mod settings;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::error::CliError;
use crate::run::Command;
use crate::settings::{Format, Settings};

#[derive(Debug, Parser)]
#[command(name = "cprsim", version, about = "Resource and cooperation dynamics")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Integrate one trajectory
    Simulate(RunArgs),
    /// Report stationary points and their stability
    Equilibria(RunArgs),
    /// Map basins of attraction over a grid of initial states
    Sweep(RunArgs),
    /// Run the finite-population stochastic ensemble
    Ensemble(RunArgs),
    /// List update rules and their strategy equations
    Rules {
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
    },
}

#[derive(Debug, Args)]
struct RunArgs {
    /// TOML or JSON settings file (a run manifest replays that run)
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    settings: Settings,
}

impl RunArgs {
    fn resolve(self) -> Result<Settings, CliError> {
        match &self.config {
            Some(path) => Ok(self.settings.over(Settings::load(path)?)),
            None => Ok(self.settings),
        }
    }
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    let (cmd, args) = match cli.command {
        Cmd::Rules { format } => {
            print!("{}", run::rules_listing(format)?);
            return Ok(());
        }
        Cmd::Simulate(a) => (Command::Simulate, a),
        Cmd::Equilibria(a) => (Command::Equilibria, a),
        Cmd::Sweep(a) => (Command::Sweep, a),
        Cmd::Ensemble(a) => (Command::Ensemble, a),
    };
    let manifest = run::execute(cmd, args.resolve()?)?;
    println!("{}", manifest.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("cprsim: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

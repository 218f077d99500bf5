//! `evosys`: run attractor experiments from a TOML config.
//!
//! Exit status: 0 when every check passes, 1 on config or runtime errors,
//! 2 when a check fails, 3 when a check could not establish its hypotheses.

mod config;
mod output;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::config::ExperimentConfig;
use crate::run::Context;

#[derive(Parser)]
#[command(
    name = "evosys",
    version,
    about = "Attractor estimation for dissipative evolutionary systems"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Common {
    /// Experiment config (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory; overrides `output_dir` in the config.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate the ensemble and write trajectories and energy ledgers.
    Simulate(Common),
    /// Estimate strong and weak ω-limits of the ensemble.
    Omega(Common),
    /// Estimate the global attractor and its attraction verdict.
    Attractor(Common),
    /// Build the trajectory attractor from complete surrogates.
    TrajectoryAttractor(Common),
    /// Run the configured checks.
    Verify {
        #[command(flatten)]
        common: Common,
        /// Check to run (repeatable); defaults to the config's checks.
        #[arg(long = "check")]
        checks: Vec<String>,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Simulate(_) => "simulate",
            Command::Omega(_) => "omega",
            Command::Attractor(_) => "attractor",
            Command::TrajectoryAttractor(_) => "trajectory-attractor",
            Command::Verify { .. } => "verify",
        }
    }

    fn common(&self) -> &Common {
        match self {
            Command::Simulate(c) | Command::Omega(c) | Command::Attractor(c) | Command::TrajectoryAttractor(c) => c,
            Command::Verify { common, .. } => common,
        }
    }
}

fn execute(cli: &Cli) -> anyhow::Result<i32> {
    let common = cli.command.common();
    let mut cfg = ExperimentConfig::load(&common.config)?;
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    let dir = common
        .out
        .clone()
        .or_else(|| cfg.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("evosys-out"));
    let mut ctx = Context::new(cfg.clone())?;
    let out = match &cli.command {
        Command::Simulate(_) => run::simulate(&mut ctx),
        Command::Omega(_) => run::omega(&mut ctx),
        Command::Attractor(_) => run::attractor(&mut ctx),
        Command::TrajectoryAttractor(_) => run::trajectory_attractor_cmd(&mut ctx),
        Command::Verify { checks, .. } => run::verify(&mut ctx, checks),
    }?;
    output::write_all(&dir, cli.command.name(), &cfg, &out)?;
    if let Some(msg) = &out.aborted {
        eprintln!("error: {msg}");
    }
    for r in &out.reports {
        eprintln!("{}: {:?}", r.check, r.status);
    }
    Ok(out.exit_code())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

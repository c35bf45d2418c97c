//! `aocfgd`: experiment runner. Exit status 0 on success, 1 when a run errors
//! or a verification fails, 2 on usage or configuration errors.

// `!(a < b)` rejects NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod output;
mod plot;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand};
use serde_json::json;

use commands::{Context, Outcome};
use config::{ConfigError, FileConfig};
use output::RunWriter;

#[derive(Parser)]
#[command(
    name = "aocfgd",
    version,
    about = "Adaptive-order fractional multi-objective descent experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// TOML experiment file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Overrides the instance and start-point seed.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Output directory; defaults to `runs/<command>`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Replace a non-empty output directory.
    #[arg(long, global = true)]
    force: bool,

    /// Worker threads for multi-start sweeps.
    #[arg(long, global = true)]
    jobs: Option<usize>,

    /// Progress on stderr.
    #[arg(long, short, global = true)]
    verbose: bool,
}

#[derive(Subcommand, Clone, Copy, PartialEq, Eq)]
enum Command {
    /// Staged run from one start point; writes the iteration trace.
    Solve,
    /// Fractional and classical fronts from many starts, with ADRS.
    Pareto,
    /// Classical against fractional runs per regularizer.
    Compare,
    /// Fixed-point rate check on seeded instances.
    #[command(name = "verify-t5")]
    VerifyT5,
    /// Staged error bound check on seeded instances.
    #[command(name = "verify-t6")]
    VerifyT6,
    /// Reproduction report for the three analytic examples.
    Fixtures,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Self::Solve => "solve",
            Self::Pareto => "pareto",
            Self::Compare => "compare",
            Self::VerifyT5 => "verify-t5",
            Self::VerifyT6 => "verify-t6",
            Self::Fixtures => "fixtures",
        }
    }
}

fn run(cli: &Cli) -> Result<Outcome> {
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            return Err(ConfigError("--jobs: must be positive".into()).into());
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()?;
    }
    let config = match &cli.config {
        Some(path) => config::load(path)?,
        None if cli.command == Command::Fixtures => FileConfig::default(),
        None => return Err(ConfigError("--config: required for this command".into()).into()),
    };
    let out_dir = cli
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from("runs").join(cli.command.name()));
    let mut writer = RunWriter::prepare(&out_dir, cli.force)?;
    let ctx = Context {
        config: &config,
        config_dir: cli.config.as_deref().and_then(|p| p.parent()),
        seed: cli.seed,
        verbose: cli.verbose,
    };
    let mut outcome = match cli.command {
        Command::Solve => commands::solve(&ctx, &mut writer)?,
        Command::Pareto => commands::pareto(&ctx, &mut writer)?,
        Command::Compare => commands::compare(&ctx, &mut writer)?,
        Command::VerifyT5 => commands::verify_t5(&ctx, &mut writer)?,
        Command::VerifyT6 => commands::verify_t6(&ctx, &mut writer)?,
        Command::Fixtures => commands::fixtures(&ctx, &mut writer)?,
    };
    let mut summary = std::mem::take(&mut outcome.summary);
    summary.insert("command".into(), json!(cli.command.name()));
    summary.insert(
        "config".into(),
        json!(cli.config.as_ref().map(|p| p.display().to_string())),
    );
    summary.insert("seed".into(), json!(cli.seed));
    summary.insert(
        "checks".into(),
        json!(outcome
            .checks
            .iter()
            .map(|(name, pass)| json!({"name": name, "pass": pass}))
            .collect::<Vec<_>>()),
    );
    summary.insert("passed".into(), json!(outcome.failures().is_empty()));
    let dir = writer.finish(summary)?;
    if cli.verbose {
        eprintln!("wrote {}", dir.display());
    }
    Ok(outcome)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(&cli) {
        Ok(outcome) => {
            let failures = outcome.failures();
            if failures.is_empty() {
                ExitCode::SUCCESS
            } else {
                for f in &failures {
                    eprintln!("check failed: {f}");
                }
                ExitCode::from(1)
            }
        }
        Err(e) if e.downcast_ref::<ConfigError>().is_some() => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

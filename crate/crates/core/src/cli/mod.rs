//! Command-line driver: `verify`, `simulate`, `closure` and `compare`.
//!
//! Exit codes are 0 on success, 1 when a check or comparison fails or a
//! solver errors, and 2 for configuration errors.

mod commands;
pub mod config;
pub mod report;
pub mod verify;

use std::ffi::OsString;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::error::{Error, Result};

pub use commands::{closure, compare, simulate, Output};
pub use config::ExperimentConfig;
pub use report::SCHEMA_VERSION;
pub use verify::{run_suite, Suite};

/// Directory used when neither `--out` nor `output.directory` is given.
pub const DEFAULT_OUT: &str = "tsallis-out";

#[derive(Debug, Parser)]
#[command(
    name = "tsallis-dia",
    version,
    about = "Stochastic oscillators driven by q-exponentially correlated noise"
)]
pub struct Cli {
    /// output directory (overrides `output.directory`)
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// master seed (overrides `ensemble.master_seed`)
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// worker threads; results do not depend on it
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a built-in verification suite.
    Verify { suite: Suite },
    /// Monte Carlo ensemble mean of the Green's function, with its oracle when one exists.
    Simulate { config: PathBuf },
    /// Time-domain and Laplace-inverted closure solutions.
    Closure { config: PathBuf },
    /// Compare configured curves against the first one.
    Compare { config: PathBuf },
}

/// Outcome of a command that ran to completion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Passed,
    Failed,
}

pub fn exit_code(r: &Result<Status>) -> u8 {
    match r {
        Ok(Status::Passed) => 0,
        Ok(Status::Failed) => 1,
        Err(Error::Config { .. } | Error::Json(_)) => 2,
        Err(_) => 1,
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let r = execute(&cli);
    if let Err(e) = &r {
        eprintln!("error: {e}");
    }
    ExitCode::from(exit_code(&r))
}

pub fn execute(cli: &Cli) -> Result<Status> {
    match cli.threads {
        Some(0) => Err(Error::Config {
            path: "--threads".into(),
            reason: "must be at least 1".into(),
        }),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::Config {
                path: "--threads".into(),
                reason: e.to_string(),
            })?
            .install(|| dispatch(cli)),
        None => dispatch(cli),
    }
}

fn dispatch(cli: &Cli) -> Result<Status> {
    let load = |path: &PathBuf| -> Result<(ExperimentConfig, Output)> {
        let mut cfg = ExperimentConfig::load(path)?;
        if let (Some(seed), Some(e)) = (cli.seed, cfg.ensemble.as_mut()) {
            e.master_seed = seed;
        }
        let dir = cli
            .out
            .clone()
            .or_else(|| cfg.output.directory.clone())
            .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT));
        Ok((cfg, Output::new(dir)))
    };
    match &cli.command {
        Command::Verify { suite } => {
            let report = run_suite(*suite)?;
            let json = serde_json::to_string_pretty(&report)?;
            println!("{json}");
            if let Some(dir) = &cli.out {
                Output::new(dir.clone()).write(&format!("verify_{suite}.json"), json.as_bytes())?;
            }
            Ok(if report.passed { Status::Passed } else { Status::Failed })
        }
        Command::Simulate { config } => {
            let (cfg, out) = load(config)?;
            simulate(&cfg, &out)
        }
        Command::Closure { config } => {
            let (cfg, out) = load(config)?;
            closure(&cfg, &out)
        }
        Command::Compare { config } => {
            let (cfg, out) = load(config)?;
            compare(&cfg, &out)
        }
    }
}

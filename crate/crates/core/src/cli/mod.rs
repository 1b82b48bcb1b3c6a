//! Command-line front end: JSON config in, CSV out.
//!
//! Exit status: 0 on success, 1 for configuration or usage errors, 2 for
//! runtime errors, 3 when a run produced too few events to estimate from.

pub mod commands;
pub mod config;
pub mod csv;
pub mod selftest;

use std::ffi::OsString;
use std::path::PathBuf;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand};

use crate::error::{Error, Result};
use crate::par;
use config::Config;
use csv::Document;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_RUNTIME: i32 = 2;
pub const EXIT_STATISTICS: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "spincorr", version, about = "Spin-correlated fourth-order interference: closed forms, Monte Carlo, CH tests")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate closed-form probabilities on parameter grids.
    Analytic(RunArgs),
    /// Run the event-level Monte Carlo and report counts and estimators.
    Simulate(RunArgs),
    /// Evaluate or maximize the CH statistic.
    Bell(RunArgs),
    /// Efficiency thresholds against visibility and the unequal-superposition ratio.
    Scan(RunArgs),
    /// Check the closed forms against the Fock engine and print pass/fail.
    Selftest {
        #[arg(long)]
        threads: Option<usize>,
    },
}

#[derive(Debug, Args)]
struct RunArgs {
    /// JSON configuration file.
    #[arg(long)]
    config: PathBuf,
    /// CSV output file.
    #[arg(long)]
    out: PathBuf,
    /// Overrides `run.seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides `run.trials`.
    #[arg(long)]
    trials: Option<u64>,
    /// Worker threads; never changes the results.
    #[arg(long)]
    threads: Option<usize>,
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) => EXIT_CONFIG,
        Error::InsufficientStatistics(_) => EXIT_STATISTICS,
        _ => EXIT_RUNTIME,
    }
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    match cli.command {
        Command::Selftest { threads } => {
            let checks = par::with_threads(threads, selftest::run);
            for c in &checks {
                println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
            }
            if checks.iter().all(|c| c.passed) {
                EXIT_OK
            } else {
                EXIT_RUNTIME
            }
        }
        Command::Analytic(a) => finish(execute("analytic", a, commands::analytic)),
        Command::Simulate(a) => finish(execute("simulate", a, commands::simulate)),
        Command::Bell(a) => finish(execute("bell", a, commands::bell)),
        Command::Scan(a) => finish(execute("scan", a, commands::scan)),
    }
}

fn finish(result: Result<()>) -> i32 {
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("spincorr: {e}");
            exit_code(&e)
        }
    }
}

fn execute(name: &str, args: RunArgs, command: fn(&Config) -> Result<Vec<csv::Table>>) -> Result<()> {
    let mut config = Config::load(&args.config)?;
    if let Some(seed) = args.seed {
        config.run.seed = seed;
    }
    if let Some(trials) = args.trials {
        config.run.trials = trials;
    }
    if args.threads == Some(0) {
        return Err(Error::Config("--threads must be at least 1".into()));
    }
    let tables = par::with_threads(args.threads, || command(&config))?;
    let timestamp = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
    let doc = Document {
        header: vec![
            ("spincorr".into(), env!("CARGO_PKG_VERSION").into()),
            ("command".into(), name.into()),
            ("config_sha256".into(), config.sha256()),
            ("seed".into(), config.run.seed.to_string()),
            ("timestamp_unix".into(), timestamp.to_string()),
            ("config".into(), config.normalized()),
        ],
        tables,
    };
    std::fs::write(&args.out, doc.render()?).map_err(|e| Error::Io(format!("{}: {e}", args.out.display())))
}

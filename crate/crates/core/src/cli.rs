//! Command-line front end: `run`, `check` and `report`.
//!
//! Exit codes: 0 on success, 1 on configuration, parse or I/O errors,
//! 2 when some cell has too few non-degenerate trials for the first-order
//! checks (outputs are still written).

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand};

use crate::config::read_config_file;
use crate::error::{Error, Result};
use crate::experiment::{check_first_order, run_experiment, ExperimentResult};
use crate::output::{emit_outputs, load_run, write_summaries};

pub const THREADS_ENV: &str = "EXCESS_RISK_LAB_THREADS";

#[derive(Debug, Parser)]
#[command(name = "excess-risk-lab", version, about = "Monte-Carlo excess-risk experiments on partition models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the experiment described by a configuration file and write its outputs.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Overrides the seed of the configuration file.
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads, 0 for one per core. Falls back to EXCESS_RISK_LAB_THREADS.
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Parse and validate a configuration file without running it.
    Check {
        #[arg(long)]
        config: PathBuf,
    },
    /// Recompute summaries from the per-trial records of a run directory.
    Report {
        #[arg(long)]
        out: PathBuf,
    },
}

fn thread_count(flag: Option<usize>) -> Result<usize> {
    if let Some(k) = flag {
        return Ok(k);
    }
    match std::env::var(THREADS_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| Error::config(format!("{THREADS_ENV} must be a non-negative integer, got `{v}`"))),
        Err(_) => Ok(0),
    }
}

fn print_summary(result: &ExperimentResult) {
    println!("n,D,r,trials,degenerate,target,mean_true,mean_emp,median_ratio,coverage_true_0.3");
    for s in result.cells.iter().map(|c| &c.summary) {
        println!(
            "{},{},{},{},{},{:.6e},{:.6e},{:.6e},{:.4},{:.4}",
            s.n,
            s.dimension,
            s.degree,
            s.trials,
            s.degenerate,
            s.target,
            s.mean_true,
            s.mean_emp,
            s.median_ratio,
            s.coverage_true[1]
        );
    }
    if let Some(rate) = &result.sup_rate {
        println!("sup-norm rate: rho = {:.4}, kappa = {:.4}", rate.rho, rate.kappa);
    }
}

fn first_order_status(result: &ExperimentResult) -> Result<()> {
    if result.cells.is_empty() {
        return Ok(());
    }
    check_first_order(result).map(|_| ())
}

fn run(config: &Path, out: &Path, seed: Option<u64>, threads: Option<usize>) -> Result<()> {
    let mut file = read_config_file(config)?;
    if let Some(seed) = seed {
        file.seed = seed;
    }
    let experiment = file.build()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(thread_count(threads)?)
        .build()
        .map_err(|e| Error::config(format!("cannot start worker threads: {e}")))?;
    let start = Instant::now();
    let result = pool.install(|| run_experiment(&experiment))?;
    let elapsed = start.elapsed().as_secs_f64();
    let manifest = emit_outputs(&result, out, &file.to_toml(), file.seed, elapsed)?;
    print_summary(&result);
    eprintln!("wrote {} files to {} in {elapsed:.2}s", manifest.files.len() + 1, out.display());
    first_order_status(&result)
}

fn check(config: &Path) -> Result<()> {
    let experiment = read_config_file(config)?.build()?;
    println!(
        "{}: valid, {} cells, {} trials each, degree {}",
        config.display(),
        experiment.cells.len(),
        experiment.trials,
        experiment.degree
    );
    Ok(())
}

fn report(out: &Path) -> Result<()> {
    let result = load_run(out)?;
    write_summaries(&result, out)?;
    print_summary(&result);
    first_order_status(&result)
}

fn exit_code(err: &Error) -> i32 {
    match err {
        Error::InsufficientData(_) => 2,
        _ => 1,
    }
}

/// Parses `args` (including the program name) and executes the subcommand.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let outcome = match &cli.command {
        Command::Run { config, out, seed, threads } => run(config, out, *seed, *threads),
        Command::Check { config } => check(config),
        Command::Report { out } => report(out),
    };
    match outcome {
        Ok(()) => 0,
        Err(err) => {
            eprintln!("error: {err}");
            exit_code(&err)
        }
    }
}

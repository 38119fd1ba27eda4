//! `walkbell` — quantum-walk Bell-test experiments from the command line.
//!
//! One subcommand per experiment: `benchmark` (Schmidt-aligned construction
//! and saturation check), `scan-r` (fixed-settings magnitude scan),
//! `coarse` (randomized coarse-grained witness search), `finite-time`
//! (small-T accessibility sweep), and `emulate` (finite-shot quasiprobability
//! reconstruction of a stored witness). Every run writes plot-ready CSV/JSON
//! plus a manifest with the resolved configuration and SHA-256 digests of
//! each output, and identical configurations reproduce every output file
//! byte for byte.

mod commands;
mod config;
mod manifest;

use clap::{Parser, Subcommand};
use std::path::PathBuf;

/// Environment variable selecting the worker-thread count; defaults to the
/// machine's logical core count.
const WORKERS_ENV: &str = "WALKBELL_WORKERS";

#[derive(Debug)]
pub enum CliError {
    /// Bad configuration or input file: exit code 2.
    Config(String),
    /// Filesystem problem: exit code 1.
    Io(String),
    /// A requested check failed at the configured tolerance: exit code 1.
    Check(String),
    /// Evaluation error from the core library: exit code 1.
    Run(String),
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            _ => 1,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Config(m) | CliError::Io(m) | CliError::Check(m) | CliError::Run(m) => m,
        }
    }
}

#[derive(Parser)]
#[command(
    name = "walkbell",
    version,
    about = "Coined quantum-walk Bell tests with extended coin preparations"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// JSON configuration file; omitted fields take their defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory for CSV/JSON artifacts and the run manifest.
    #[arg(long, global = true, default_value = "walkbell-out")]
    out: PathBuf,
    /// Replaces the config's seed (or the whole seed list) with one seed.
    #[arg(long, global = true)]
    seed_override: Option<u64>,
    /// Replaces the config's verification tolerance.
    #[arg(long, global = true)]
    tol: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Discover the benchmark direction, build Schmidt-aligned optimal
    /// settings, verify saturation, and extract the extended-preparation
    /// witness.
    Benchmark,
    /// Scan preparation magnitudes under the fixed Schmidt-aligned settings.
    ScanR,
    /// Randomized multi-start coarse-grained witness search.
    Coarse,
    /// Repeat the coarse search over a list of small walk times.
    FiniteTime,
    /// Finite-shot signed reconstruction of a stored witness.
    Emulate,
}

fn init_workers() -> Result<(), CliError> {
    if let Ok(raw) = std::env::var(WORKERS_ENV) {
        let n: usize = raw.parse().map_err(|_| {
            CliError::Config(format!("{WORKERS_ENV} must be a positive integer, got {raw:?}"))
        })?;
        if n == 0 {
            return Err(CliError::Config(format!("{WORKERS_ENV} must be >= 1")));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Run(format!("cannot build thread pool: {e}")))?;
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<(), CliError> {
    init_workers()?;
    let path = cli.config.as_deref();
    match cli.command {
        Command::Benchmark => {
            let mut cfg: config::BenchmarkConfig = config::load(path)?;
            if let Some(seed) = cli.seed_override {
                cfg.seed = seed;
            }
            if let Some(tol) = cli.tol {
                cfg.tol = tol;
            }
            commands::cmd_benchmark(&cfg, &cli.out)
        }
        Command::ScanR => {
            let mut cfg: config::ScanRConfig = config::load(path)?;
            if let Some(seed) = cli.seed_override {
                cfg.seed = seed;
            }
            if let Some(tol) = cli.tol {
                cfg.tol = tol;
            }
            commands::cmd_scan_r(&cfg, &cli.out)
        }
        Command::Coarse => {
            let mut cfg: config::CoarseConfig = config::load(path)?;
            if let Some(seed) = cli.seed_override {
                cfg.seeds = vec![seed];
            }
            if let Some(tol) = cli.tol {
                cfg.tol = tol;
            }
            commands::cmd_coarse(&cfg, &cli.out)
        }
        Command::FiniteTime => {
            let mut cfg: config::FiniteTimeConfig = config::load(path)?;
            if let Some(seed) = cli.seed_override {
                cfg.seeds = vec![seed];
            }
            if let Some(tol) = cli.tol {
                cfg.tol = tol;
            }
            commands::cmd_finite_time(&cfg, &cli.out)
        }
        Command::Emulate => {
            let mut cfg: config::EmulateConfig = config::load(path)?;
            if let Some(seed) = cli.seed_override {
                cfg.seed = seed;
            }
            commands::cmd_emulate(&cfg, &cli.out)
        }
    }
}

fn main() {
    let cli = Cli::parse();
    if let Err(err) = run(&cli) {
        eprintln!("error: {}", err.message());
        std::process::exit(err.exit_code());
    }
}

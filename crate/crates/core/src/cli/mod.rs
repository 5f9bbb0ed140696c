//! The `spinflow` command line: `solve`, `reconstruct`, `blowup`, `verify`
//! and `generate`, each driven by a [`RunConfig`] file.
//!
//! Exit codes:
//!
//! | code | meaning |
//! |-----:|---------|
//! | 0 | success |
//! | 1 | a verification check failed |
//! | 2 | invalid configuration or command line |
//! | 3 | file system error |
//! | 4 | malformed input file |
//! | 5 | solver diverged or did not converge |
//! | 6 | domain, precondition or analysis failure |
//!
//! `SPINFLOW_THREADS` caps the worker pool. Results do not depend on it.

pub mod config;
mod blowup;
mod generate;
mod reconstruct;
mod report;
mod solve;
mod verify;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::error::{Result, SpinflowError};

pub use config::RunConfig;
pub use report::guard_block;

#[derive(Debug, Parser)]
#[command(name = "spinflow", version, about = "Nonlinear Dirac equations on flat surfaces")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Solve the cubic Dirac equation and write the solution field.
    Solve(CommonArgs),
    /// Build the Weierstrass surface of a field and write it as OBJ.
    Reconstruct(CommonArgs),
    /// Detect blow-up points and bubbles in a sequence of fields.
    Blowup(CommonArgs),
    /// Run the self-check suite.
    Verify(CommonArgs),
    /// Write synthetic field files.
    Generate(CommonArgs),
}

#[derive(Debug, Clone, PartialEq, Eq, clap::Args)]
pub struct CommonArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory, overriding `output.dir`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Seed, overriding `run.seed`.
    #[arg(long)]
    pub seed: Option<u64>,
}

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_IO: i32 = 3;
pub const EXIT_FORMAT: i32 = 4;
pub const EXIT_SOLVER: i32 = 5;
pub const EXIT_DOMAIN: i32 = 6;

pub fn exit_code(err: &SpinflowError) -> i32 {
    match err {
        SpinflowError::Configuration(_) => EXIT_CONFIG,
        SpinflowError::Io(_) => EXIT_IO,
        SpinflowError::Format(_) => EXIT_FORMAT,
        SpinflowError::NonConvergence { .. } | SpinflowError::Divergence { .. } => EXIT_SOLVER,
        _ => EXIT_DOMAIN,
    }
}

/// Applies `SPINFLOW_THREADS` to the global worker pool.
fn configure_threads() -> Result<()> {
    let Ok(value) = std::env::var("SPINFLOW_THREADS") else { return Ok(()) };
    let threads: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| SpinflowError::Configuration(format!("SPINFLOW_THREADS=`{value}` is not a positive integer")))?;
    // a second call in the same process finds the pool already built
    let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    Ok(())
}

fn load(args: &CommonArgs) -> Result<RunConfig> {
    let mut cfg = RunConfig::load(&args.config).map_err(|e| match e {
        SpinflowError::Io(io) => SpinflowError::Io(std::io::Error::new(
            io.kind(),
            format!("cannot read config {}: {io}", args.config.display()),
        )),
        other => other,
    })?;
    if let Some(out) = &args.out {
        cfg.output_dir = out.clone();
    }
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    Ok(cfg)
}

fn dispatch(command: Command) -> Result<i32> {
    configure_threads()?;
    match command {
        Command::Solve(a) => solve::run(&load(&a)?),
        Command::Reconstruct(a) => reconstruct::run(&load(&a)?),
        Command::Blowup(a) => blowup::run(&load(&a)?),
        Command::Verify(a) => verify::run(&load(&a)?),
        Command::Generate(a) => generate::run(&load(&a)?),
    }
}

/// Runs a parsed command line and returns the process exit code. Errors are
/// reported on stderr.
pub fn run(cli: Cli) -> i32 {
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            exit_code(&err)
        }
    }
}

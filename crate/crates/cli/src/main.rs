//! `gs`: configuration-driven runs of the ground-state solvers.
//!
//! Three subcommands share one JSON configuration format: `solve` runs a
//! single solver, `compare` races several from the same initial guess,
//! `mesh-study` re-solves the finite-element problem across mesh levels.
//! Exit codes: 0 when every run converged, 2 when a solver stopped early
//! (histories are still written), 1 for configuration errors, which never
//! produce output files.  Set `GS_LOG=debug` (or `info`, `trace`) to watch
//! solver internals.

mod commands;
mod config;
mod error;
mod instance;
mod output;

use clap::{Args, Parser, Subcommand};
use config::Mode;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "gs", version, about = "Ground-state solver workbench")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one solver and write its convergence history.
    Solve(RunArgs),
    /// Run two or more solvers from one shared initial guess.
    Compare(RunArgs),
    /// Re-solve the finite-element problem across mesh levels.
    MeshStudy(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// JSON run configuration.
    config: PathBuf,
    /// Directory prefixed to relative output paths (created if needed).
    #[arg(long)]
    output_dir: Option<PathBuf>,
    /// Replaces the disorder seed from the configuration.
    #[arg(long)]
    seed: Option<u64>,
    /// Concurrent solver runs in `compare`.
    #[arg(long, default_value_t = 1)]
    threads: usize,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("GS_LOG", "warn"))
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();
    let (mode, args) = match &cli.command {
        Command::Solve(args) => (Mode::Solve, args),
        Command::Compare(args) => (Mode::Compare, args),
        Command::MeshStudy(args) => (Mode::MeshStudy, args),
    };
    match commands::run(
        mode,
        &args.config,
        args.output_dir.as_deref(),
        args.seed,
        args.threads,
    ) {
        Ok(code) => ExitCode::from(code as u8),
        Err(err) => {
            eprintln!("gs: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}

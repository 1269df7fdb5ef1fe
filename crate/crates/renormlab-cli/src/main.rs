//! `renormlab` batch front end.
//!
//! Exit status: 0 success, 2 configuration error, 3 numerical tolerance
//! failure, 4 admissibility failure (the failing condition is named on
//! stderr), 1 for I/O errors. Outputs are computed in full before anything
//! is written, then each file is written atomically, followed by a
//! `<primary>.manifest.json` sidecar.

mod commands;
mod config;
mod error;
mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};

use crate::commands::*;
use crate::error::Result;
use crate::output::{manifest_path, sha256_hex, to_json, write_atomic, RunManifest};

/// Recorded in every manifest. The current commands are deterministic and
/// draw no random numbers.
const DEFAULT_SEED: u64 = 0x5eed_1d2c_0ffe_e001;

#[derive(Parser, Debug)]
#[command(name = "renormlab", version, about = "Renormalized radiation-reaction and level-shift calculations")]
struct Cli {
    /// Flat key = value configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Spatial dimension; overrides the configuration.
    #[arg(long, global = true)]
    dim: Option<usize>,
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Bound-state energies and momentum matrix elements as JSON.
    Eig(EigArgs),
    /// Renormalized second-order level shift as JSON.
    Shift(ShiftArgs),
    /// Divergence law of the local radiation-reaction force as CSV.
    RrScan(RrScanArgs),
    /// Bare mass, counterterm and discarded constant over α.
    Ledger(LedgerArgs),
    /// Admissibility of a memory-integral history as JSON.
    KernelCheck(KernelCheckArgs),
    /// Mean-field propagation: trajectory CSV, modes JSON, breakdown CSV.
    Propagate(PropagateArgs),
    /// Naive versus renormalized mass coefficient over α as CSV.
    DemoNaive(DemoNaiveArgs),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Eig(_) => "eig",
            Command::Shift(_) => "shift",
            Command::RrScan(_) => "rr-scan",
            Command::Ledger(_) => "ledger",
            Command::KernelCheck(_) => "kernel-check",
            Command::Propagate(_) => "propagate",
            Command::DemoNaive(_) => "demo-naive",
        }
    }
}

fn run(cli: &Cli, args: Vec<String>) -> Result<String> {
    let start = Instant::now();
    let cfg = config::load_config(cli.config.as_deref(), cli.dim)?;
    let outcome = match &cli.command {
        Command::Eig(a) => eig(&cfg, a),
        Command::Shift(a) => shift(&cfg, a),
        Command::RrScan(a) => rr_scan(&cfg, a),
        Command::Ledger(a) => ledger(&cfg, a),
        Command::KernelCheck(a) => kernel_check(&cfg, a),
        Command::Propagate(a) => propagate_cmd(&cfg, a),
        Command::DemoNaive(a) => demo_naive(&cfg, a),
    }?;
    // The hash covers the resolved configuration and every flag.
    let mut fingerprint = to_json(&cfg);
    fingerprint.extend(format!("{:?}", cli.command).bytes());
    let wall = start.elapsed().as_secs_f64();
    for a in &outcome.artifacts {
        write_atomic(&a.path, &a.bytes)?;
    }
    let primary: &Path = &outcome.artifacts[0].path;
    let manifest = RunManifest::new(cli.command.name(), args, sha256_hex(&fingerprint), cli.seed, &outcome.artifacts, wall);
    write_atomic(&manifest_path(primary), &to_json(&manifest))?;
    match outcome.deferred_error {
        Some(e) => Err(e),
        None => Ok(outcome.summary),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let args: Vec<String> = std::env::args().skip(1).collect();
    match run(&cli, args) {
        Ok(summary) => {
            println!("{}: {summary}", cli.command.name());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("renormlab {}: {e}", cli.command.name());
            e.exit_code()
        }
    }
}

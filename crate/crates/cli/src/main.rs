//! `rcs`: file-based front end for circuit generation, simulation, sampling,
//! fidelity estimation and classical cost estimation.

mod commands;
mod run;
mod units;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::*;

#[derive(Parser)]
#[command(name = "rcs", version, about = "Random circuit sampling toolkit")]
struct Cli {
    /// Worker threads; outputs do not depend on this value.
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Directory overriding the bundled data (also read from RCS_DATA_DIR).
    #[arg(long, global = true)]
    data_dir: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random circuit on a qubit subset.
    Gen(GenArgs),
    /// Remove the two-qubit gates crossing a patch partition.
    Patch(PatchArgs),
    /// Compute the exact output state.
    Simulate(SimulateArgs),
    /// Sample bitstrings, optionally with noise.
    Sample(SampleArgs),
    /// Linear XEB fidelity of a sample file.
    Xeb(XebArgs),
    /// Speckle purity and Porter-Thomas distance of a circuit's distribution.
    Purity(PurityArgs),
    /// Error-model fidelity prediction.
    Predict(PredictArgs),
    /// Tensor-network cost estimate, or the published reference table.
    Cost(CostArgs),
    /// Check a fidelity time series against a stability band.
    Monitor(MonitorArgs),
    /// Quantum wall-clock time for a number of shots.
    Runtime(RuntimeArgs),
}

const EXIT_VALIDATION: u8 = 3;
const EXIT_CAPACITY: u8 = 4;

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.chain().find_map(|e| e.downcast_ref::<rcs_core::Error>()) {
        Some(e) if e.is_capacity() => EXIT_CAPACITY,
        _ => EXIT_VALIDATION,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot configure {n} threads: {e}");
            return ExitCode::from(EXIT_VALIDATION);
        }
    }
    let ctx = Context::new(cli.data_dir, cli.threads);
    let result = match &cli.command {
        Command::Gen(a) => gen(&ctx, a),
        Command::Patch(a) => patch(&ctx, a),
        Command::Simulate(a) => simulate(&ctx, a),
        Command::Sample(a) => sample(&ctx, a),
        Command::Xeb(a) => xeb(&ctx, a),
        Command::Purity(a) => purity(&ctx, a),
        Command::Predict(a) => predict(&ctx, a),
        Command::Cost(a) => cost(&ctx, a),
        Command::Monitor(a) => monitor(&ctx, a),
        Command::Runtime(a) => runtime(&ctx, a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

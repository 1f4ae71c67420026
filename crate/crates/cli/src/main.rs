//! `dispersolve`: simulate, verify, estimate and convergence commands.
//!
//! Exit codes: 0 success, 1 configuration or parameter error,
//! 2 Picard non-convergence or numerical breakdown, 3 failed verification
//! suite, 4 convergence order below threshold, 5 output I/O error.

mod commands;
mod config;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use dispersolve::InitialCondition;

use commands::{EstimateArgs, Failure};

#[derive(Parser)]
#[command(name = "dispersolve", version, about = "Solver and estimate auditor for higher-order dispersive equations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the nonlinear problem and write report.json and series.csv
    Simulate { config: PathBuf },
    /// Run the randomized inequality suites
    Verify { config: PathBuf },
    /// Print the existence-time budget
    Estimate {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        l: usize,
        #[arg(long = "L")]
        length: f64,
        /// Ball radius; alternatively derive it from --u0
        #[arg(long = "R", conflicts_with = "u0")]
        radius: Option<f64>,
        /// Initial data, e.g. sin2:1 or soliton:16,13.3
        #[arg(long)]
        u0: Option<InitialCondition>,
        /// Interior nodes used to evaluate the norms of --u0
        #[arg(long = "N", default_value_t = 512)]
        n: usize,
        #[arg(long, default_value_t = 0.5)]
        horizon: f64,
        /// Print the budget as JSON
        #[arg(long)]
        json: bool,
    },
    /// Refinement study on manufactured solutions
    Convergence { config: PathBuf },
}

fn init_threads() -> Result<(), Failure> {
    if let Ok(v) = std::env::var("DISPERSOLVE_THREADS") {
        let n: usize = v.parse().ok().filter(|&n| n > 0).ok_or_else(|| {
            Failure::config(anyhow::anyhow!("DISPERSOLVE_THREADS must be a positive integer, got {v:?}"))
        })?;
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(Failure::config)?;
    }
    Ok(())
}

fn run(cli: Cli) -> commands::Outcome {
    init_threads()?;
    match cli.command {
        Command::Simulate { config } => commands::simulate(&commands::load(&config)?),
        Command::Verify { config } => commands::verify(&commands::load(&config)?),
        Command::Convergence { config } => commands::convergence(&commands::load(&config)?),
        Command::Estimate { k, l, length, radius, u0, n, horizon, json } => {
            commands::estimate(&EstimateArgs { k, l, length, radius, u0, n, horizon, json })
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(commands::EXIT_CONFIG);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}

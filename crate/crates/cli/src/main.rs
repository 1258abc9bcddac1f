use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

mod commands;
mod output;
mod solution;

#[derive(Parser, Debug)]
#[command(
    name = "cascade",
    version,
    about = "Liability rules for cascading supply-chain disruptions"
)]
struct Cli {
    /// Seed for every random draw (multistart, simulation, verification)
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Output path; a directory for `solve`, a file otherwise. Defaults to stdout
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Residual tolerance for the solvers (default 1e-10); for `verify`, the
    /// profile-gap tolerance (default 1e-6)
    #[arg(long, global = true)]
    tol: Option<f64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Mode {
    Efficient,
    Equilibrium,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve for efficient or equilibrium investments
    Solve {
        /// Problem JSON file
        problem: PathBuf,
        #[arg(long, value_enum, default_value = "efficient")]
        mode: Mode,
        /// phi-star | disruptor-pays | own-loss | pi:<file> | matrix:<file>
        #[arg(long)]
        solution: Option<String>,
    },
    /// Print a liability matrix and its axiom report
    Liability {
        problem: PathBuf,
        #[arg(long)]
        solution: String,
    },
    /// Monte Carlo study of the first-best solution
    Simulate {
        #[arg(long, default_value_t = 8)]
        agents: usize,
        #[arg(long, default_value_t = 10_000)]
        reps: usize,
        #[arg(long, default_value_t = 1.0)]
        loss_min: f64,
        #[arg(long, default_value_t = 100.0)]
        loss_max: f64,
        /// sqrt | sqrt:<scale> | powerexp:<ceiling>,<rate>,<exponent>
        #[arg(long, default_value = "sqrt")]
        tech: String,
        /// Also render the means as a two-panel SVG
        #[arg(long)]
        svg: Option<PathBuf>,
        /// Also write every instance's records
        #[arg(long)]
        per_instance: Option<PathBuf>,
        /// Run instances on one thread
        #[arg(long)]
        sequential: bool,
    },
    /// Efficiency loss of disruptor-pays on the calibrated construction
    Poa {
        #[arg(long, default_value_t = 10)]
        agents: usize,
        #[arg(long, default_value_t = 0.01, allow_negative_numbers = true)]
        epsilon: f64,
        #[arg(long, default_value_t = 5.0)]
        bound: f64,
    },
    /// Run the numerical verification suite
    Verify {
        #[arg(long, value_delimiter = ',', default_values_t = [2, 3, 5, 8])]
        sizes: Vec<usize>,
        /// Print the human-readable report instead of JSON
        #[arg(long)]
        text: bool,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match commands::run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            let numerical = e
                .chain()
                .find_map(|c| c.downcast_ref::<cascade::Error>())
                .is_some_and(|c| c.is_numerical());
            ExitCode::from(if numerical { 2 } else { 1 })
        }
    }
}

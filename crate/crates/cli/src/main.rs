use std::process::ExitCode;

use clap::{Parser, Subcommand};

use cindex_cli::commands::{self, cindex::CindexArgs, km::KmArgs, simulate::SimulateArgs, Failure};

/// Evaluate concordance indices under many software conventions at once.
#[derive(Parser)]
#[command(name = "cindex-multiverse", version)]
struct Cli {
    /// Worker threads (defaults to the number of cores). Results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Score predictions with a set of C-index profiles.
    Cindex(CindexArgs),
    /// Generate semi-synthetic datasets and their oracle C-index.
    Simulate(SimulateArgs),
    /// Kaplan-Meier estimate of the event or censoring distribution.
    Km(KmArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    let outcome = match cli.command {
        Command::Cindex(args) => commands::cindex::run(args),
        Command::Simulate(args) => commands::simulate::run(args),
        Command::Km(args) => commands::km::run(args),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Input(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
        Err(Failure::Compute(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(3)
        }
    }
}

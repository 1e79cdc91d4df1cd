//! `levpriv` — privatize words and transition-system runs, dump the machines
//! behind the sampler, and verify the privacy guarantee exhaustively on small
//! instances.
//!
//! Exit codes: 0 success (and verification pass), 1 usage or input error,
//! 2 verification failure, 3 enumeration cap exceeded.

use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod automaton_cmd;
mod common;
mod dist_cmd;
mod gridworld_cmd;
mod run_cmd;
mod svg;
mod verify_cmd;
mod word_cmd;

#[derive(Parser)]
#[command(
    name = "levpriv",
    version,
    about = "Differentially private words and transition-system runs via Levenshtein-automaton sampling"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Privatize a word over a finite alphabet
    Word(word_cmd::WordArgs),
    /// Privatize a run of a deterministic transition system
    Run(run_cmd::RunArgs),
    /// Build and dump a substitution machine (optionally distance-restricted)
    Automaton(automaton_cmd::AutomatonArgs),
    /// Emit the distance-class distribution as CSV
    Dist(dist_cmd::DistArgs),
    /// Exhaustively verify the privacy guarantee on a small instance
    Verify(verify_cmd::VerifyArgs),
    /// Generate a grid-world transition system as JSON
    Gridworld(gridworld_cmd::GridworldArgs),
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            // Help and version requests are not usage errors.
            if err.use_stderr() {
                eprint!("{err}");
                return ExitCode::from(1);
            }
            print!("{err}");
            return ExitCode::SUCCESS;
        }
    };
    let outcome = match cli.command {
        Command::Word(args) => word_cmd::run(args),
        Command::Run(args) => run_cmd::run(args),
        Command::Automaton(args) => automaton_cmd::run(args),
        Command::Dist(args) => dist_cmd::run(args),
        Command::Verify(args) => verify_cmd::run(args),
        Command::Gridworld(args) => gridworld_cmd::run(args),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
    }
}

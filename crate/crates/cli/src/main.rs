//! `zkqubit`: check test messages, attack them, and run fidelity experiments.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use output::Format;

#[derive(Debug, Parser)]
#[command(
    name = "zkqubit",
    version,
    about = "Simulate and attack qubit-knowledge test messages"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Global {
    /// Seed for every random draw
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Monte Carlo trials for estimate and game
    #[arg(long, global = true, default_value_t = 50_000)]
    pub samples: usize,
    /// Worker threads (default: all cores); results do not depend on it
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Write the report here instead of stdout
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FamilyArg {
    TrivialCheat,
    ClassicalDirection,
    Scp,
    RandomConvincing,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RoleArg {
    Eve,
    Bob,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PolicyArg {
    Discard,
    Remaining,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EtaArg {
    Independent,
    Correlated,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CheatArg {
    Random,
    Fixed,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check conditions 1 and 2 of a message against a state (exit 2 if not convincing)
    Check {
        message: PathBuf,
        /// `bloch:x,y,z` or `amp:re,im,re,im`
        #[arg(long, allow_hyphen_values = true)]
        phi: String,
        /// Also run the brute-force grid check
        #[arg(long)]
        oracle: bool,
        #[arg(long, default_value_t = 2000)]
        grid: usize,
    },
    /// Reconstruct the state from a classical message or run the extraction attack
    Attack {
        message: PathBuf,
        #[arg(long, default_value_t = 10_000)]
        trials: usize,
        /// State to compare extracted copies against
        #[arg(long, allow_hyphen_values = true)]
        reference: Option<String>,
        /// Eigenvalues below 1 - tol count as the complement
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        /// Write the extraction plan as JSON
        #[arg(long)]
        plan: Option<PathBuf>,
    },
    /// Mean fidelity of the covariant N-copy estimator
    Estimate {
        /// Number of copies; repeat for several reports
        #[arg(long = "copies", default_values_t = [1usize])]
        copies: Vec<usize>,
    },
    /// Eve and Bob fidelity experiments, or one game transcript
    Game {
        #[arg(value_enum)]
        family: FamilyArg,
        #[arg(long, value_enum, default_value_t = RoleArg::Both)]
        role: RoleArg,
        #[arg(long, value_enum, default_value_t = PolicyArg::Remaining)]
        policy: PolicyArg,
        #[arg(long, default_value_t = 2)]
        ancilla_dim: usize,
        #[arg(long, value_enum, default_value_t = EtaArg::Independent)]
        eta: EtaArg,
        /// Play a single game against this state and print its transcript
        #[arg(long, allow_hyphen_values = true)]
        transcript: Option<String>,
        /// With --transcript: let Eve intercept the message
        #[arg(long)]
        eavesdrop: bool,
        /// With --transcript: Alice cheats
        #[arg(long, value_enum)]
        cheat: Option<CheatArg>,
        /// With --cheat fixed: the state Alice uses
        #[arg(long, allow_hyphen_values = true)]
        cheat_state: Option<String>,
    },
    /// Property suite over random convincing messages (exit 2 on any violation)
    Corpus {
        #[arg(long, default_value_t = 200)]
        size: usize,
        #[arg(long, default_value_t = 4)]
        max_ancilla_dim: usize,
        #[arg(long, default_value_t = 2000)]
        grid: usize,
    },
    /// Write a scenario message as JSON
    Message {
        #[arg(value_enum)]
        family: FamilyArg,
        /// State or measurement direction (`bloch:..` or `amp:..`)
        #[arg(long, allow_hyphen_values = true)]
        phi: Option<String>,
        #[arg(long, default_value_t = 2)]
        ancilla_dim: usize,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match commands::run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

//! `ordelic` command-line front end.

mod commands;
mod io;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

/// Exit statuses shared by every subcommand.
pub const EXIT_OK: u8 = 0;
pub const EXIT_INPUT: u8 = 2;
pub const EXIT_BOUND: u8 = 3;
pub const EXIT_SEARCH: u8 = 4;

#[derive(Parser, Debug)]
#[command(name = "ordelic", version, about = "Surrogate properties for ordered reports, with calibration audits")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build a surrogate from a property spec and report on it.
    Construct(RunArgs),
    /// Evaluate a surrogate over a barycentric grid of the 2-simplex.
    Levelsets(RunArgs),
    /// Sample a labeled dataset and predictor from a scenario.
    Simulate(RunArgs),
    /// Audit a predictor against a surrogate and check the calibration bounds.
    Audit(RunArgs),
    /// Search for an instance where calibration does not transfer.
    Counterexample(RunArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Algo {
    Embedding,
    Normals,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum NormArg {
    L1,
    L2,
    Linf,
    /// Euclidean distance in the equilateral ternary diagram (n = 3).
    Ternary,
}

impl From<NormArg> for ordelic::Metric {
    fn from(n: NormArg) -> Self {
        match n {
            NormArg::L1 => ordelic::Metric::L1,
            NormArg::L2 => ordelic::Metric::L2,
            NormArg::Linf => ordelic::Metric::Linf,
            NormArg::Ternary => ordelic::Metric::Ternary,
        }
    }
}

/// Flags accepted by every subcommand; each uses the ones it needs.
#[derive(clap::Args, Clone, Debug, Serialize)]
pub struct RunArgs {
    /// Property spec, surrogate file or scenario, depending on the subcommand.
    #[arg(long)]
    pub spec: PathBuf,
    #[arg(long, value_enum, default_value = "normals")]
    pub algo: Algo,
    /// Embedding points for the reports, comma separated.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub phi: Option<Vec<f64>>,
    /// Outer slope of the envelope losses (embedding only).
    #[arg(long)]
    pub outer_slope: Option<f64>,
    #[arg(long, env = "ORDELIC_SEED")]
    pub seed: Option<u64>,
    /// Monte Carlo sample count: refinement checks, rows or search starts.
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long, value_enum, default_value = "l2")]
    pub norm: NormArg,
    /// Uniform bin width for scalar predictions; exact-value bins if absent.
    #[arg(long)]
    pub bin_width: Option<f64>,
    #[arg(long, default_value_t = 200)]
    pub resolution: usize,
    /// Output file, or directory for subcommands that write several files.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Labeled dataset CSV (audit).
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Predictor table JSON (audit).
    #[arg(long)]
    pub predictor: Option<PathBuf>,
    /// Lipschitz constant to use instead of the surrogate's own (audit).
    #[arg(long)]
    pub lipschitz: Option<f64>,
    /// Lipschitz constant of the prediction-to-conditional map; estimated if absent (audit).
    #[arg(long)]
    pub c_marginal: Option<f64>,
    /// Gap constant C (counterexample); 0.9 times the estimated optimal constant if absent.
    #[arg(long)]
    pub c: Option<f64>,
}

/// An error carrying the exit status it should produce.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub error: anyhow::Error,
}

impl Failure {
    pub fn input(error: impl Into<anyhow::Error>) -> Self {
        Failure {
            code: EXIT_INPUT,
            error: error.into(),
        }
    }
}

impl From<ordelic::Error> for Failure {
    fn from(e: ordelic::Error) -> Self {
        let code = match e {
            ordelic::Error::SearchExhausted { .. } => EXIT_SEARCH,
            _ => EXIT_INPUT,
        };
        Failure {
            code,
            error: e.into(),
        }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(error: anyhow::Error) -> Self {
        Failure {
            code: EXIT_INPUT,
            error,
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::input(e)
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::input(e)
    }
}

pub type CmdResult = Result<u8, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Construct(a) => commands::construct(a),
        Command::Levelsets(a) => commands::levelsets(a),
        Command::Simulate(a) => commands::simulate(a),
        Command::Audit(a) => commands::audit(a),
        Command::Counterexample(a) => commands::counterexample(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}

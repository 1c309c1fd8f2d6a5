//! `lagrep`: derive and certify Lagrangian representations of
//! bi-Hamiltonian pairs `(K ∂_x, A₂)`.
//!
//! Exit codes: 0 success, 1 a certification failed, 2 input error,
//! 3 the jet-order bound was exceeded.

mod commands;
mod input;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use lagrep::Error;

use crate::input::Which;

#[derive(Parser, Debug)]
#[command(name = "lagrep", version, about = "Lagrangian representations of bi-Hamiltonian pairs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Built-in system (available: wdvv3).
    #[arg(long, conflicts_with = "input", required_unless_present = "input")]
    pub fixture: Option<String>,
    /// System file in JSON.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Write the JSON result to this file.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Suppress the human-readable summary on standard error.
    #[arg(long)]
    pub json: bool,
    /// Highest jet order the algebra may create.
    #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u64).range(1..=64))]
    pub jet_bound: u64,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Rewrite an operator in the flat coordinates of the file's transform.
    Transform {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value = "a2")]
        operator: Which,
    },
    /// Run the full pipeline and certify the result.
    Derive {
        #[command(flatten)]
        common: Common,
        /// Degree of each factor (u^i - u^j) in the denominators tried for R.
        #[arg(long, default_value_t = 2)]
        rden_bound: u32,
    },
    /// Skew-adjointness, homogeneity and per-triple Jacobi evidence.
    Check {
        #[command(flatten)]
        common: Common,
        /// Check one operator only; by default both, with compatibility.
        #[arg(long, value_enum)]
        operator: Option<Which>,
        /// Highest jet order of the monomial test covectors.
        #[arg(long, default_value_t = 2)]
        triple_order: usize,
    },
    /// Geometry of the leading metric of the symplectic operator.
    Curvature {
        #[command(flatten)]
        common: Common,
        /// Rational point for the signature, comma separated.
        #[arg(long, default_value = "0,1,3")]
        point: String,
    },
    /// One step of the recursion A1 E(h') = A2 E(h).
    Recursion {
        #[command(flatten)]
        common: Common,
        /// Starting density in flat coordinates; by default the Casimirs u^k,
        /// compared with K^{km} L_m.
        #[arg(long)]
        density: Option<String>,
        #[arg(long, default_value_t = 2)]
        rden_bound: u32,
    },
    /// Conservation of the characteristic functions L_n along the flow of h.
    Conservation {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 2)]
        rden_bound: u32,
    },
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::JetOrderExceeded { .. } => 3,
        Error::NotTotalDivergence { .. }
        | Error::NotVariational(_)
        | Error::Unsupported(_)
        | Error::AnsatzViolation(_)
        | Error::NoSolution { .. } => 1,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Transform { common, operator } => commands::transform(&common, operator),
        Command::Derive { common, rden_bound } => commands::derive(&common, rden_bound),
        Command::Check { common, operator, triple_order } => commands::check(&common, operator, triple_order),
        Command::Curvature { common, point } => commands::curvature(&common, &point),
        Command::Recursion { common, density, rden_bound } => commands::recursion(&common, density.as_deref(), rden_bound),
        Command::Conservation { common, rden_bound } => commands::conservation(&common, rden_bound),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

//! Command-line front end: compute tail bounds, compare them against exact
//! tails over grids, decompose PGFs, and run coupling simulations.
//!
//! Exit codes: 0 success; 1 a domination/invariant violation was detected
//! (or a witness search exhausted its budget); 2 usage or domain errors.

use clap::Parser;

mod bound_cmd;
mod common;
mod compare_cmd;
mod decompose_cmd;
mod oracle_cmd;
mod simulate_cmd;

#[derive(Parser)]
#[command(
    name = "tailbounds",
    version,
    about = "Tail bounds for indicator sums: evaluate, compare against exact tails, decompose, simulate"
)]
enum Cli {
    /// Evaluate one bound at one query point.
    Bound(bound_cmd::BoundArgs),
    /// Tabulate bounds against exact tails over a deviation grid.
    Compare(compare_cmd::CompareArgs),
    /// Exact moments and tail probabilities.
    Oracle(oracle_cmd::OracleArgs),
    /// PGF real-rootedness and Bernoulli factorization.
    Decompose(decompose_cmd::DecomposeArgs),
    /// Coupling Monte Carlo or the heavy-tail witness search.
    Simulate(simulate_cmd::SimulateArgs),
}

fn main() {
    let cli = Cli::parse();
    let outcome = match &cli {
        Cli::Bound(args) => bound_cmd::run(args),
        Cli::Compare(args) => compare_cmd::run(args),
        Cli::Oracle(args) => oracle_cmd::run(args),
        Cli::Decompose(args) => decompose_cmd::run(args),
        Cli::Simulate(args) => simulate_cmd::run(args),
    };
    match outcome {
        Ok(code) => std::process::exit(code),
        Err(tailbounds::Error::SearchExhausted { attempts, log }) => {
            eprintln!("error: search budget exhausted after {attempts} candidates");
            for line in log {
                eprintln!("  {line}");
            }
            std::process::exit(1);
        }
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(2);
        }
    }
}

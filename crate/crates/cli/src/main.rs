//! `rapm`: command-line driver for the rapm-core laboratory.
//!
//! Reports are JSON on stdout (and `<command>.json` under `--out`); CSV
//! artifacts are written only when `--out` is given. Exit codes: 0 pass,
//! 1 validation failure, 2 numerical failure.

mod commands;
mod config;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use rapm_core::symmetry::CatalogParams;

use commands::{Outcome, Status};
use config::{Overrides, RunConfig};

#[derive(Parser)]
#[command(
    name = "rapm",
    version,
    about = "Invariant solutions, symmetry checks, FD and hedging for the RAPM equation"
)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// JSON run configuration; omitted keys take their defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Directory for reports and CSV artifacts.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed for the Monte Carlo commands.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    sigma: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    rate: Option<f64>,
    /// Round-trip cost `C`.
    #[arg(long, global = true)]
    cost: Option<f64>,
    /// Risk premium `R`.
    #[arg(long, global = true)]
    risk_premium: Option<f64>,
    #[arg(long, global = true)]
    maturity: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Derived constants and admissibility (`C·R < π/8`, `C/R < σ²T`).
    Params,
    /// Evaluate an invariant family on a grid with its residual.
    SolveInvariant,
    /// Residual, parabolicity and flow checks for an invariant family.
    Verify,
    /// Finite-difference solve from terminal and boundary data.
    FdSolve,
    /// Delta-hedging Monte Carlo around the optimal revision interval.
    Simulate {
        /// Also write per-path outcomes at the optimal interval.
        #[arg(long)]
        paths: bool,
    },
    /// Lie algebra of point symmetries.
    #[command(subcommand)]
    Symmetry(SymmetryCommand),
}

#[derive(Subcommand)]
enum SymmetryCommand {
    /// Commutator table of the generators.
    Table {
        #[arg(long, allow_hyphen_values = true)]
        rate: Option<f64>,
        /// Use the split basis e1..e4 instead of U1..U4.
        #[arg(long)]
        e_basis: bool,
        /// Print the JSON report instead of the text grid.
        #[arg(long)]
        json: bool,
    },
    /// Closure of every subalgebra in the optimal system.
    Catalog {
        #[arg(long, allow_hyphen_values = true)]
        rate: Option<f64>,
        #[arg(long, default_value_t = 0.7, allow_hyphen_values = true)]
        a: f64,
        #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
        eps: f64,
        #[arg(long, default_value_t = 1.1)]
        phi: f64,
    },
    /// Apply the configured flows to the configured family.
    CheckFlow,
    /// Invariance condition through the second prolongation at random jets.
    Prolong {
        #[arg(long, default_value_t = 500)]
        samples: usize,
    },
}

/// Print to stdout, treating a closed pipe as success.
fn emit(text: &str) -> Result<()> {
    let mut out = std::io::stdout().lock();
    match out.write_all(text.as_bytes()).and_then(|_| out.flush()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

fn write_outputs(out: &Option<PathBuf>, name: &str, outcome: &Outcome) -> Result<()> {
    let Some(dir) = out else { return Ok(()) };
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let report = serde_json::to_string_pretty(&outcome.report)? + "\n";
    std::fs::write(dir.join(format!("{name}.json")), report)?;
    for (file, contents) in &outcome.files {
        std::fs::write(dir.join(file), contents).with_context(|| format!("writing {file}"))?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<Status> {
    let g = &cli.global;
    let overrides = Overrides {
        sigma: g.sigma,
        rate: g.rate,
        cost: g.cost,
        risk_premium: g.risk_premium,
        maturity: g.maturity,
        seed: g.seed,
    };
    let cfg = RunConfig::load(g.config.as_deref(), &overrides)?;
    let (name, outcome) = match &cli.command {
        Command::Params => ("params", commands::params(&cfg)?),
        Command::SolveInvariant => ("solve-invariant", commands::solve_invariant(&cfg)?),
        Command::Verify => ("verify", commands::verify(&cfg)?),
        Command::FdSolve => ("fd-solve", commands::fd_solve_cmd(&cfg)?),
        Command::Simulate { paths } => ("simulate", commands::simulate(&cfg, *paths)?),
        Command::Symmetry(SymmetryCommand::Table { rate, e_basis, json }) => {
            let (outcome, text) = commands::symmetry_table(rate.unwrap_or(cfg.model.r()), *e_basis)?;
            write_outputs(&g.out, "symmetry-table", &outcome)?;
            if *json {
                emit(&(serde_json::to_string_pretty(&outcome.report)? + "\n"))?;
            } else {
                emit(&text)?;
            }
            return Ok(outcome.status);
        }
        Command::Symmetry(SymmetryCommand::Catalog { rate, a, eps, phi }) => {
            let params = CatalogParams {
                a: *a,
                eps: *eps,
                phi: *phi,
            };
            (
                "symmetry-catalog",
                commands::symmetry_catalog(rate.unwrap_or(cfg.model.r()), params)?,
            )
        }
        Command::Symmetry(SymmetryCommand::CheckFlow) => ("symmetry-check-flow", commands::symmetry_check_flow(&cfg)?),
        Command::Symmetry(SymmetryCommand::Prolong { samples }) => {
            let seed = g.seed.unwrap_or(cfg.simulation.seed);
            ("symmetry-prolong", commands::symmetry_prolong(&cfg, *samples, seed)?)
        }
    };
    write_outputs(&g.out, name, &outcome)?;
    emit(&(serde_json::to_string_pretty(&outcome.report)? + "\n"))?;
    Ok(outcome.status)
}

fn main() -> ExitCode {
    // usage errors are validation failures; clap's own code 2 is reserved
    // here for numerical breakdowns
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let status = match run(cli) {
        Ok(status) => status,
        Err(e) => {
            eprintln!("error: {e:#}");
            let numerical = e
                .chain()
                .any(|c| c.downcast_ref::<rapm_core::Error>().is_some_and(|e| e.is_numerical()));
            if numerical {
                Status::Numerical
            } else {
                Status::Validation
            }
        }
    };
    ExitCode::from(status.exit_code() as u8)
}

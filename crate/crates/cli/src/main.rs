use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use cptport_cli::commands::{self, CliError};
use cptport_cli::config::{parse_params, Method, SolverOptions, StartSpec};
use cptport_core::CptParams;

/// Maximize cumulative prospect theory utility over empirical returns.
#[derive(Parser)]
#[command(name = "cptport", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonOpts {
    /// Returns CSV: header of asset names, one row of simple returns per period.
    #[arg(long)]
    returns: PathBuf,
    /// CPT parameters as gamma+,gamma-,delta+,delta- .
    #[arg(long)]
    params: Option<String>,
    /// Write JSON output here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SolverOpts {
    /// Random seed for starts and synthetic data.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Worker threads for GA multi-start and grid rows
    /// (falls back to CPTPORT_THREADS, then 1).
    #[arg(long)]
    threads: Option<usize>,
    /// Outer iteration cap for mm/cc.
    #[arg(long)]
    max_iter: Option<usize>,
    /// Gradient steps per start for ga/ga-softmax.
    #[arg(long)]
    steps: Option<usize>,
    /// Initial trust radius for cc.
    #[arg(long)]
    trust_radius: Option<f64>,
    /// Lattice spacing for grid.
    #[arg(long, default_value_t = 0.01)]
    grid_step: f64,
    /// Per-asset lower bounds (comma list; default long-only zeros).
    #[arg(long)]
    lower: Option<String>,
    /// Per-asset upper bounds (comma list; default unbounded).
    #[arg(long)]
    upper: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the CPT utility of fixed weights.
    Evaluate {
        #[command(flatten)]
        common: CommonOpts,
        /// Portfolio weights (comma list, summing to one).
        #[arg(long)]
        weights: String,
    },
    /// Run one optimization method and write a solve report.
    Optimize {
        #[command(flatten)]
        common: CommonOpts,
        /// One of mm, cc, ga, ga-softmax, mv, grid.
        #[arg(long)]
        method: String,
        /// equal | mv | dirichlet:<count> | explicit weights.
        #[arg(long, default_value = "equal")]
        starts: String,
        #[command(flatten)]
        solver: SolverOpts,
    },
    /// Extend the dataset with Gaussian-mixture synthetic returns.
    Synth {
        /// Returns CSV to extend.
        #[arg(long)]
        returns: PathBuf,
        /// Output row count as a multiple of the input rows.
        #[arg(long)]
        factor: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output CSV path.
        #[arg(long)]
        out: PathBuf,
    },
    /// Compare methods from equal weights and from the MV start.
    Report {
        #[command(flatten)]
        common: CommonOpts,
        /// Comma list of methods to compare.
        #[arg(long)]
        method: String,
        #[command(flatten)]
        solver: SolverOpts,
    },
}

fn resolve_threads(flag: Option<usize>) -> Result<usize, CliError> {
    if let Some(t) = flag {
        return Ok(t);
    }
    match std::env::var("CPTPORT_THREADS") {
        Ok(v) => v.parse().map_err(|_| {
            commands::validation(vec![format!("CPTPORT_THREADS is not a number: {v:?}")])
        }),
        Err(_) => Ok(1),
    }
}

fn resolve_params(spec: &Option<String>) -> Result<CptParams, CliError> {
    match spec {
        None => Ok(CptParams::default()),
        Some(s) => {
            parse_params(s).map_err(|e| commands::validation(vec![format!("--params: {e}")]))
        }
    }
}

fn solver_options(solver: &SolverOpts) -> SolverOptions {
    SolverOptions {
        max_iter: solver.max_iter,
        steps: solver.steps,
        trust_radius: solver.trust_radius,
        grid_step: solver.grid_step,
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Evaluate { common, weights } => {
            let params = resolve_params(&common.params)?;
            commands::evaluate::run(&commands::evaluate::EvaluateArgs {
                returns: common.returns,
                weights,
                params,
                out: common.out,
            })
        }
        Command::Optimize {
            common,
            method,
            starts,
            solver,
        } => {
            let mut errors = Vec::new();
            let method = Method::from_str(&method).map_err(|e| errors.push(e)).ok();
            let starts = StartSpec::from_str(&starts).map_err(|e| errors.push(e)).ok();
            if !errors.is_empty() {
                return Err(commands::validation(errors));
            }
            let params = resolve_params(&common.params)?;
            let threads = resolve_threads(solver.threads)?;
            commands::optimize::run(&commands::optimize::OptimizeArgs {
                method: method.expect("validated"),
                returns: common.returns,
                params,
                starts: starts.expect("validated"),
                seed: solver.seed,
                threads,
                out: common.out,
                options: solver_options(&solver),
                lower: solver.lower,
                upper: solver.upper,
            })
        }
        Command::Synth {
            returns,
            factor,
            seed,
            out,
        } => commands::synth::run(&commands::synth::SynthArgs {
            returns,
            factor,
            seed,
            out,
        }),
        Command::Report {
            common,
            method,
            solver,
        } => {
            let mut errors = Vec::new();
            let mut methods = Vec::new();
            for part in method.split(',') {
                match Method::from_str(part.trim()) {
                    Ok(m) => methods.push(m),
                    Err(e) => errors.push(e),
                }
            }
            if !errors.is_empty() {
                return Err(commands::validation(errors));
            }
            let params = resolve_params(&common.params)?;
            let threads = resolve_threads(solver.threads)?;
            commands::report_cmd::run(&commands::report_cmd::ReportArgs {
                returns: common.returns,
                methods,
                params,
                seed: solver.seed,
                threads,
                out: common.out,
                options: solver_options(&solver),
                lower: solver.lower,
                upper: solver.upper,
            })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Validation(errors)) => {
            for e in &errors {
                eprintln!("error: {e}");
            }
            ExitCode::from(2)
        }
        Err(CliError::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

//! Subcommand implementations and the plumbing they share: validation
//! error collection, phase timing, start generation, and report assembly.

pub mod evaluate;
pub mod optimize;
pub mod report_cmd;
pub mod synth;

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::time::Instant;

use cptport_core::ga::GaStartRecord;
use cptport_core::mv::MvHeuristicResult;
use cptport_core::solve::SolveRun;
use cptport_core::{ConstraintSet, CptParams, Portfolio, ReturnsMatrix};

use crate::config::{SolverOptions, StartSpec};
use crate::report::{BestRecordJson, StartRecordJson};

/// Validation problems are collected and reported together (exit code 2);
/// anything after validation is a runtime failure (exit code 1).
#[derive(Debug)]
pub enum CliError {
    Validation(Vec<String>),
    Runtime(anyhow::Error),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Validation(errors) => {
                for e in errors {
                    writeln!(f, "error: {e}")?;
                }
                Ok(())
            }
            CliError::Runtime(e) => write!(f, "error: {e:#}"),
        }
    }
}

impl<E: Into<anyhow::Error>> From<E> for CliError {
    fn from(e: E) -> Self {
        CliError::Runtime(e.into())
    }
}

pub fn validation(errors: Vec<String>) -> CliError {
    CliError::Validation(errors)
}

/// Wall-clock phases for the report's timing section.
pub struct Phases {
    timings: BTreeMap<String, f64>,
}

impl Default for Phases {
    fn default() -> Self {
        Self::new()
    }
}

impl Phases {
    pub fn new() -> Self {
        Self {
            timings: BTreeMap::new(),
        }
    }

    pub fn time<T>(&mut self, name: &str, f: impl FnOnce() -> T) -> T {
        let start = Instant::now();
        let out = f();
        self.timings
            .insert(name.to_string(), start.elapsed().as_secs_f64());
        out
    }

    pub fn snapshot(&self) -> BTreeMap<String, f64> {
        self.timings.clone()
    }
}

/// Starting portfolios resolved from a [`StartSpec`], plus the MV seed when
/// the spec asked for it.
pub struct ResolvedStarts {
    pub starts: Vec<Portfolio>,
    pub mv_seed: Option<MvHeuristicResult>,
}

pub fn resolve_starts(
    spec: &StartSpec,
    returns: &ReturnsMatrix,
    params: &CptParams,
    set: &ConstraintSet,
    seed: u64,
    phases: &mut Phases,
) -> Result<ResolvedStarts, CliError> {
    let n = returns.n_assets();
    match spec {
        StartSpec::Equal => Ok(ResolvedStarts {
            starts: vec![Portfolio::equal(n).map_err(anyhow::Error::from)?],
            mv_seed: None,
        }),
        StartSpec::Explicit(weights) => {
            let mut errors = Vec::new();
            if weights.len() != n {
                errors.push(format!(
                    "explicit start has {} weights but the dataset has {n} assets",
                    weights.len()
                ));
            }
            let portfolio = Portfolio::new(weights.clone())
                .map_err(|e| {
                    errors.push(format!("explicit start: {e}"));
                })
                .ok();
            if !errors.is_empty() {
                return Err(validation(errors));
            }
            Ok(ResolvedStarts {
                starts: vec![portfolio.expect("validated above")],
                mv_seed: None,
            })
        }
        StartSpec::Dirichlet(count) => Ok(ResolvedStarts {
            starts: crate::data::dirichlet_starts(n, *count, 1.0, seed),
            mv_seed: None,
        }),
        StartSpec::Mv => {
            let pick = phases.time("mv_start", || {
                cptport_core::mv::mv_heuristic(returns, params, set, 100)
            })?;
            Ok(ResolvedStarts {
                starts: vec![pick.portfolio.clone()],
                mv_seed: Some(pick),
            })
        }
    }
}

pub fn solve_run_to_record(index: usize, run: &SolveRun) -> StartRecordJson {
    StartRecordJson {
        index,
        start_weights: run.start.weights().to_vec(),
        weights: run.portfolio.weights().to_vec(),
        utility: run.utility,
        iterations: run.iterations,
        termination: run.termination.as_str().to_string(),
        utility_trace: run.utility_trace.clone(),
    }
}

pub fn ga_record_to_record(index: usize, rec: &GaStartRecord) -> StartRecordJson {
    StartRecordJson {
        index,
        start_weights: rec.start.weights().to_vec(),
        weights: rec.best.weights().to_vec(),
        utility: rec.best_utility,
        iterations: rec.utility_trace.len().saturating_sub(1),
        termination: "steps_exhausted".to_string(),
        utility_trace: rec.utility_trace.clone(),
    }
}

pub fn best_of(records: &[StartRecordJson]) -> BestRecordJson {
    let mut best = 0;
    for (i, rec) in records.iter().enumerate() {
        if rec.utility > records[best].utility {
            best = i;
        }
    }
    BestRecordJson {
        start_index: records[best].index,
        weights: records[best].weights.clone(),
        utility: records[best].utility,
    }
}

/// `out = report.json` places traces next to it as
/// `report.start<k>.trace.csv`.
pub fn trace_path(out: &Path, start_index: usize) -> PathBuf {
    let stem = out
        .file_stem()
        .map(|s| s.to_string_lossy().to_string())
        .unwrap_or_else(|| "report".to_string());
    let name = format!("{stem}.start{start_index}.trace.csv");
    out.with_file_name(name)
}

pub fn bounds_json(bounds: &[f64]) -> Vec<Option<f64>> {
    bounds
        .iter()
        .map(|&b| if b.is_finite() { Some(b) } else { None })
        .collect()
}

pub fn params_json(params: &CptParams) -> serde_json::Value {
    serde_json::json!({
        "gamma_pos": params.gamma_pos,
        "gamma_neg": params.gamma_neg,
        "delta_pos": params.delta_pos,
        "delta_neg": params.delta_neg,
    })
}

pub fn options_json(options: &SolverOptions, seed: u64, threads: usize) -> serde_json::Value {
    serde_json::json!({
        "max_iter": options.max_iter,
        "steps": options.steps,
        "trust_radius": options.trust_radius,
        "grid_step": options.grid_step,
        "seed": seed,
        "threads": threads,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trace_paths_sit_next_to_the_report() {
        let p = trace_path(Path::new("/tmp/run/report.json"), 3);
        assert_eq!(p, Path::new("/tmp/run/report.start3.trace.csv"));
    }

    #[test]
    fn best_of_takes_first_maximum() {
        let rec = |index: usize, utility: f64| StartRecordJson {
            index,
            start_weights: vec![],
            weights: vec![utility],
            utility,
            iterations: 0,
            termination: String::new(),
            utility_trace: vec![],
        };
        let best = best_of(&[rec(0, 0.1), rec(1, 0.4), rec(2, 0.4)]);
        assert_eq!(best.start_index, 1);
    }
}

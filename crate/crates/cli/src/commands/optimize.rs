use std::path::PathBuf;

use cptport_core::cc::{cc_optimize, CcOptions};
use cptport_core::ga::{ga_optimize_single, ga_softmax_single, GaOptions, GaStartRecord};
use cptport_core::mm::{mm_optimize, MmOptions};
use cptport_core::oracle::GridPlan;
use cptport_core::utility::CptEvaluator;
use cptport_core::{ConstraintSet, CptError, CptParams, Portfolio, ReturnsMatrix};
use rayon::prelude::*;

use super::{
    best_of, bounds_json, ga_record_to_record, options_json, params_json, resolve_starts,
    solve_run_to_record, trace_path, validation, CliError, Phases, ResolvedStarts,
};
use crate::config::{build_constraints, Method, SolverOptions, StartSpec};
use crate::data::load_returns_csv;
use crate::report::{
    DatasetInfo, GridPointJson, SolveReportJson, StartRecordJson, SCHEMA_VERSION,
};

pub struct OptimizeArgs {
    pub method: Method,
    pub returns: PathBuf,
    pub params: CptParams,
    pub starts: StartSpec,
    pub seed: u64,
    pub threads: usize,
    pub out: Option<PathBuf>,
    pub options: SolverOptions,
    pub lower: Option<String>,
    pub upper: Option<String>,
}

pub fn run(args: &OptimizeArgs) -> Result<(), CliError> {
    let loaded = load_returns_csv(&args.returns)?;
    let returns = &loaded.returns;
    let n = returns.n_assets();

    let mut errors = Vec::new();
    let set = build_constraints(n, args.lower.as_deref(), args.upper.as_deref(), &mut errors);
    validate_method(args, n, set.as_ref(), &mut errors);
    if !errors.is_empty() {
        return Err(validation(errors));
    }
    let set = set.expect("validated above");

    let mut phases = Phases::new();
    let report = solve(args, returns, &loaded.asset_names, &set, &mut phases)?;

    println!(
        "{}: best utility {} (start {})",
        report.method, report.best.utility, report.best.start_index
    );
    if let Some(out) = &args.out {
        for rec in &report.starts {
            let path = trace_path(out, rec.index);
            std::fs::write(path, crate::report::trace_csv(&rec.utility_trace))
                .map_err(anyhow::Error::from)?;
        }
    }
    super::evaluate::emit_json(&report, args.out.as_deref())?;
    Ok(())
}

fn validate_method(
    args: &OptimizeArgs,
    n: usize,
    set: Option<&ConstraintSet>,
    errors: &mut Vec<String>,
) {
    match args.method {
        Method::Grid => {
            if n > 3 {
                errors.push(format!("grid search supports 2 or 3 assets, dataset has {n}"));
            }
            let step = args.options.grid_step;
            if !(step > 0.0 && step <= 0.1) {
                errors.push(format!("grid step {step} outside (0, 0.1]"));
            }
        }
        Method::GaSoftmax => {
            if let Some(set) = set {
                if !set.is_long_only() {
                    errors.push(
                        "ga-softmax supports only the long-only constraint set".to_string(),
                    );
                }
            }
        }
        Method::Cc
            if !args.params.is_loss_averse() => {
                errors.push(
                    "the cc method requires loss-averse parameters (gamma- > gamma+)".to_string(),
                );
            }
        _ => {}
    }
    if args.threads == 0 {
        errors.push("--threads must be at least 1".to_string());
    }
}

fn solve(
    args: &OptimizeArgs,
    returns: &ReturnsMatrix,
    asset_names: &[String],
    set: &ConstraintSet,
    phases: &mut Phases,
) -> Result<SolveReportJson, CliError> {
    let params = &args.params;
    let mut grid_local_maxima = None;
    let mut mv_seed_json = serde_json::Value::Null;

    let records: Vec<StartRecordJson> = match args.method {
        Method::Mm => {
            let resolved = resolve_starts(&args.starts, returns, params, set, args.seed, phases)?;
            mv_seed_json = mv_seed_to_json(&resolved);
            let opts = MmOptions {
                max_outer: args.options.max_iter.unwrap_or(100),
                ..MmOptions::default()
            };
            phases.time("solve", || {
                resolved
                    .starts
                    .iter()
                    .enumerate()
                    .map(|(i, s)| {
                        mm_optimize(s, returns, params, set, &opts)
                            .map(|run| solve_run_to_record(i, &run))
                    })
                    .collect::<Result<Vec<_>, CptError>>()
            })?
        }
        Method::Cc => {
            let resolved = resolve_starts(&args.starts, returns, params, set, args.seed, phases)?;
            mv_seed_json = mv_seed_to_json(&resolved);
            let opts = CcOptions {
                max_outer: args.options.max_iter.unwrap_or(200),
                trust_init: args.options.trust_radius.unwrap_or(0.1),
                ..CcOptions::default()
            };
            phases.time("solve", || {
                resolved
                    .starts
                    .iter()
                    .enumerate()
                    .map(|(i, s)| {
                        cc_optimize(s, returns, params, set, &opts)
                            .map(|run| solve_run_to_record(i, &run))
                    })
                    .collect::<Result<Vec<_>, CptError>>()
            })?
        }
        Method::Ga | Method::GaSoftmax => {
            let resolved = resolve_starts(&args.starts, returns, params, set, args.seed, phases)?;
            mv_seed_json = mv_seed_to_json(&resolved);
            let opts = GaOptions {
                steps: args.options.steps.unwrap_or(2000),
                ..GaOptions::default()
            };
            let eval = CptEvaluator::new(returns, params);
            let softmax = args.method == Method::GaSoftmax;
            let run_one = |s: &Portfolio| -> Result<GaStartRecord, CptError> {
                if softmax {
                    ga_softmax_single(s, &eval, &opts)
                } else {
                    ga_optimize_single(s, &eval, set, &opts)
                }
            };
            let ga_records: Vec<GaStartRecord> = phases.time("solve", || {
                if args.threads > 1 {
                    let pool = rayon::ThreadPoolBuilder::new()
                        .num_threads(args.threads)
                        .build()
                        .map_err(anyhow::Error::from)?;
                    // per-start runs are independent; collect preserves order
                    pool.install(|| {
                        resolved
                            .starts
                            .par_iter()
                            .map(run_one)
                            .collect::<Result<Vec<_>, CptError>>()
                    })
                    .map_err(CliError::from)
                } else {
                    resolved
                        .starts
                        .iter()
                        .map(run_one)
                        .collect::<Result<Vec<_>, CptError>>()
                        .map_err(CliError::from)
                }
            })?;
            ga_records
                .iter()
                .enumerate()
                .map(|(i, rec)| ga_record_to_record(i, rec))
                .collect()
        }
        Method::Mv => {
            let pick = phases.time("solve", || {
                cptport_core::mv::mv_heuristic(returns, params, set, 100)
            })?;
            mv_seed_json = serde_json::json!({
                "gamma": pick.gamma,
                "degenerate": pick.degenerate,
            });
            vec![StartRecordJson {
                index: 0,
                start_weights: pick.portfolio.weights().to_vec(),
                weights: pick.portfolio.weights().to_vec(),
                utility: pick.utility,
                iterations: 100,
                termination: "frontier_scan".to_string(),
                utility_trace: vec![pick.utility],
            }]
        }
        Method::Grid => {
            let result = phases.time("solve", || -> Result<_, CliError> {
                let plan = GridPlan::new(returns, params, set, args.options.grid_step)
                    .map_err(anyhow::Error::from)?;
                let rows: Vec<Vec<f64>> = if args.threads > 1 {
                    let pool = rayon::ThreadPoolBuilder::new()
                        .num_threads(args.threads)
                        .build()
                        .map_err(anyhow::Error::from)?;
                    // rows are independent; the index order of collect keeps
                    // the reduction deterministic
                    pool.install(|| {
                        (0..plan.n_rows())
                            .into_par_iter()
                            .map(|i| plan.row_utilities(i))
                            .collect()
                    })
                } else {
                    (0..plan.n_rows()).map(|i| plan.row_utilities(i)).collect()
                };
                plan.finish(&rows).map_err(|e| anyhow::Error::from(e).into())
            })?;
            grid_local_maxima = Some(
                result
                    .local_maxima
                    .iter()
                    .map(|p| GridPointJson {
                        weights: p.weights.clone(),
                        utility: p.utility,
                    })
                    .collect::<Vec<_>>(),
            );
            vec![StartRecordJson {
                index: 0,
                start_weights: result.best.weights.clone(),
                weights: result.best.weights.clone(),
                utility: result.best.utility,
                iterations: 0,
                termination: "exhaustive".to_string(),
                utility_trace: vec![result.best.utility],
            }]
        }
    };

    let best = best_of(&records);
    let config = serde_json::json!({
        "params": params_json(params),
        "constraints": {
            "lower": bounds_json(set.lower()),
            "upper": bounds_json(set.upper()),
        },
        "starts": args.starts.describe(),
        "mv_seed": mv_seed_json,
        "options": options_json(&args.options, args.seed, args.threads),
    });

    let report = SolveReportJson {
        schema_version: SCHEMA_VERSION,
        command: "optimize".to_string(),
        method: args.method.as_str().to_string(),
        config,
        dataset: DatasetInfo::new(returns, asset_names),
        starts: records,
        best,
        grid_local_maxima,
        timing: phases.snapshot(),
    };
    debug_assert!(report.check_best_consistency());
    Ok(report)
}

fn mv_seed_to_json(resolved: &ResolvedStarts) -> serde_json::Value {
    match &resolved.mv_seed {
        None => serde_json::Value::Null,
        Some(pick) => serde_json::json!({
            "gamma": pick.gamma,
            "utility": pick.utility,
            "degenerate": pick.degenerate,
        }),
    }
}

use std::path::PathBuf;
use std::time::Instant;

use cptport_core::cc::{cc_optimize, CcOptions};
use cptport_core::ga::{ga_optimize, ga_softmax_optimize, GaOptions};
use cptport_core::mm::{mm_optimize, MmOptions};
use cptport_core::mv::mv_heuristic;
use cptport_core::oracle::grid_search;
use cptport_core::{ConstraintSet, CptParams, Portfolio, ReturnsMatrix};

use super::{bounds_json, options_json, params_json, validation, CliError, Phases};
use crate::config::{build_constraints, Method, SolverOptions};
use crate::data::load_returns_csv;
use crate::report::{ComparisonJson, DatasetInfo, ReportRowJson, SCHEMA_VERSION};

pub struct ReportArgs {
    pub returns: PathBuf,
    pub methods: Vec<Method>,
    pub params: CptParams,
    pub seed: u64,
    pub threads: usize,
    pub out: Option<PathBuf>,
    pub options: SolverOptions,
    pub lower: Option<String>,
    pub upper: Option<String>,
}

/// Run each requested method from equal weights and from the MV-heuristic
/// start, tabulating utility and wall time.
pub fn run(args: &ReportArgs) -> Result<(), CliError> {
    let loaded = load_returns_csv(&args.returns)?;
    let returns = &loaded.returns;
    let n = returns.n_assets();

    let mut errors = Vec::new();
    if args.methods.is_empty() {
        errors.push("at least one method is required".to_string());
    }
    let set = build_constraints(n, args.lower.as_deref(), args.upper.as_deref(), &mut errors);
    if args.methods.contains(&Method::Grid) && n > 3 {
        errors.push(format!("grid search supports 2 or 3 assets, dataset has {n}"));
    }
    if args.methods.contains(&Method::Cc) && !args.params.is_loss_averse() {
        errors.push("the cc method requires loss-averse parameters (gamma- > gamma+)".to_string());
    }
    if let Some(set) = set.as_ref() {
        if args.methods.contains(&Method::GaSoftmax) && !set.is_long_only() {
            errors.push("ga-softmax supports only the long-only constraint set".to_string());
        }
    }
    if !errors.is_empty() {
        return Err(validation(errors));
    }
    let set = set.expect("validated above");

    let mut phases = Phases::new();
    let mv_pick = phases.time("mv_start", || {
        mv_heuristic(returns, &args.params, &set, 100)
    })?;
    let equal = Portfolio::equal(n).map_err(anyhow::Error::from)?;

    let mut rows = Vec::new();
    for method in &args.methods {
        if method.is_iterative() {
            for (policy, start) in [("equal", &equal), ("mv", &mv_pick.portfolio)] {
                let started = Instant::now();
                let (weights, utility) = run_iterative(*method, start, returns, args, &set)?;
                rows.push(ReportRowJson {
                    method: method.as_str().to_string(),
                    start_policy: policy.to_string(),
                    utility,
                    weights,
                    wall_time_s: started.elapsed().as_secs_f64(),
                });
            }
        } else {
            let started = Instant::now();
            let (policy, weights, utility) = match method {
                Method::Mv => (
                    "frontier",
                    mv_pick.portfolio.weights().to_vec(),
                    mv_pick.utility,
                ),
                Method::Grid => {
                    let res = grid_search(returns, &args.params, &set, args.options.grid_step)
                        .map_err(anyhow::Error::from)?;
                    ("exhaustive", res.best.weights.clone(), res.best.utility)
                }
                _ => unreachable!("iterative methods handled above"),
            };
            rows.push(ReportRowJson {
                method: method.as_str().to_string(),
                start_policy: policy.to_string(),
                utility,
                weights,
                wall_time_s: started.elapsed().as_secs_f64(),
            });
        }
    }

    print_table(&rows);
    let json = ComparisonJson {
        schema_version: SCHEMA_VERSION,
        command: "report".to_string(),
        dataset: DatasetInfo::new(returns, &loaded.asset_names),
        config: serde_json::json!({
            "params": params_json(&args.params),
            "constraints": {
                "lower": bounds_json(set.lower()),
                "upper": bounds_json(set.upper()),
            },
            "methods": args.methods.iter().map(Method::as_str).collect::<Vec<_>>(),
            "mv_seed": { "gamma": mv_pick.gamma, "utility": mv_pick.utility },
            "options": options_json(&args.options, args.seed, args.threads),
        }),
        rows,
        timing: phases.snapshot(),
    };
    super::evaluate::emit_json(&json, args.out.as_deref())?;
    Ok(())
}

fn run_iterative(
    method: Method,
    start: &Portfolio,
    returns: &ReturnsMatrix,
    args: &ReportArgs,
    set: &ConstraintSet,
) -> Result<(Vec<f64>, f64), CliError> {
    let params: &CptParams = &args.params;
    match method {
        Method::Mm => {
            let opts = MmOptions {
                max_outer: args.options.max_iter.unwrap_or(100),
                ..MmOptions::default()
            };
            let run = mm_optimize(start, returns, params, set, &opts)
                .map_err(anyhow::Error::from)?;
            Ok((run.portfolio.weights().to_vec(), run.utility))
        }
        Method::Cc => {
            let opts = CcOptions {
                max_outer: args.options.max_iter.unwrap_or(200),
                trust_init: args.options.trust_radius.unwrap_or(0.1),
                ..CcOptions::default()
            };
            let run = cc_optimize(start, returns, params, set, &opts)
                .map_err(anyhow::Error::from)?;
            Ok((run.portfolio.weights().to_vec(), run.utility))
        }
        Method::Ga => {
            let opts = GaOptions {
                steps: args.options.steps.unwrap_or(2000),
                ..GaOptions::default()
            };
            let run = ga_optimize(std::slice::from_ref(start), returns, params, set, &opts)
                .map_err(anyhow::Error::from)?;
            let best = run.best();
            Ok((best.best.weights().to_vec(), best.best_utility))
        }
        Method::GaSoftmax => {
            let opts = GaOptions {
                steps: args.options.steps.unwrap_or(2000),
                ..GaOptions::default()
            };
            let run = ga_softmax_optimize(std::slice::from_ref(start), returns, params, &opts)
                .map_err(anyhow::Error::from)?;
            let best = run.best();
            Ok((best.best.weights().to_vec(), best.best_utility))
        }
        Method::Mv | Method::Grid => unreachable!("not iterative"),
    }
}

fn print_table(rows: &[ReportRowJson]) {
    println!("{:<12} {:<10} {:>14} {:>12}", "method", "start", "utility", "time (s)");
    for row in rows {
        println!(
            "{:<12} {:<10} {:>14.8} {:>12.3}",
            row.method, row.start_policy, row.utility, row.wall_time_s
        );
    }
}

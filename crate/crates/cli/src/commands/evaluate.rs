use std::path::{Path, PathBuf};

use cptport_core::utility::CptEvaluator;
use cptport_core::{CptParams, Portfolio};

use super::CliError;
use crate::config::parse_float_list;
use crate::data::load_returns_csv;
use crate::report::{DatasetInfo, EvaluateJson, SCHEMA_VERSION};

pub struct EvaluateArgs {
    pub returns: PathBuf,
    pub weights: String,
    pub params: CptParams,
    pub out: Option<PathBuf>,
}

/// Print the CPT utility of a fixed portfolio together with the
/// decision-weight summary, and emit the same numbers as JSON.
pub fn run(args: &EvaluateArgs) -> Result<(), CliError> {
    let loaded = load_returns_csv(&args.returns)?;
    let n = loaded.returns.n_assets();

    let mut errors = Vec::new();
    let weights = match parse_float_list(&args.weights) {
        Ok(w) if w.len() == n => Some(w),
        Ok(w) => {
            errors.push(format!(
                "--weights has {} entries but the dataset has {n} assets",
                w.len()
            ));
            None
        }
        Err(e) => {
            errors.push(format!("--weights: {e}"));
            None
        }
    };
    let portfolio = weights.and_then(|w| match Portfolio::new(w) {
        Ok(p) => Some(p),
        Err(e) => {
            errors.push(format!("--weights: {e}"));
            None
        }
    });
    let Some(portfolio) = portfolio else {
        return Err(super::validation(errors));
    };

    let eval = CptEvaluator::new(&loaded.returns, &args.params);
    let utility = eval.utility(portfolio.weights());
    let ctx = eval.sort_context(portfolio.weights());
    let dw = eval.decision_weights(ctx.n_pos());
    let pi_pos_sum: f64 = dw.pi_pos.iter().sum();
    let pi_neg_sum: f64 = dw.pi_neg.iter().sum();

    println!("utility: {utility}");
    println!("gains (N+): {}   losses (N-): {}", dw.n_pos, dw.n_neg);
    println!("sum pi+: {pi_pos_sum}   sum pi-: {pi_neg_sum}");

    let json = EvaluateJson {
        schema_version: SCHEMA_VERSION,
        command: "evaluate".to_string(),
        dataset: DatasetInfo::new(&loaded.returns, &loaded.asset_names),
        weights: portfolio.weights().to_vec(),
        utility,
        n_pos: dw.n_pos,
        n_neg: dw.n_neg,
        pi_pos_sum,
        pi_neg_sum,
    };
    emit_json(&json, args.out.as_deref())?;
    Ok(())
}

pub(super) fn emit_json<T: serde::Serialize>(
    value: &T,
    out: Option<&Path>,
) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).map_err(anyhow::Error::from)?;
    match out {
        Some(path) => std::fs::write(path, text + "\n").map_err(anyhow::Error::from)?,
        None => println!("{text}"),
    }
    Ok(())
}

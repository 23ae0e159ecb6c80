//! Projected gradient ascent on the CPT utility, with best-iterate tracking
//! and batched multi-start. A softmax-parametrized variant handles the
//! long-only case without projections.
//!
//! Starts are independent, so callers may fan them out across workers and
//! merge the records by start index; this module itself stays sequential.

use alloc::vec::Vec;

use crate::constraints::{project, ConstraintSet};
use crate::error::{CptError, Result};
use crate::math;
use crate::params::CptParams;
use crate::returns::{Portfolio, ReturnsMatrix};
use crate::utility::CptEvaluator;

#[derive(Debug, Clone)]
pub struct GaOptions {
    /// Gradient steps per start.
    pub steps: usize,
    /// Initial step size of the decaying schedule `η_k = η0 / (1 + k/K)`,
    /// `K = steps/2`.
    pub eta0: f64,
}

impl Default for GaOptions {
    fn default() -> Self {
        Self {
            steps: 2000,
            eta0: 0.05,
        }
    }
}

/// Outcome for one starting point.
#[derive(Debug, Clone)]
pub struct GaStartRecord {
    pub start: Portfolio,
    pub best: Portfolio,
    pub best_utility: f64,
    /// Best-seen utility per iteration (nondecreasing), starting with the
    /// projected start's utility.
    pub utility_trace: Vec<f64>,
}

/// Multi-start outcome; `best_index` points at the record with the highest
/// best-seen utility (first such index under ties).
#[derive(Debug, Clone)]
pub struct GaRun {
    pub records: Vec<GaStartRecord>,
    pub best_index: usize,
}

impl GaRun {
    pub fn best(&self) -> &GaStartRecord {
        &self.records[self.best_index]
    }

    pub fn from_records(records: Vec<GaStartRecord>) -> Result<Self> {
        if records.is_empty() {
            return Err(CptError::UnsupportedConfig("at least one start required"));
        }
        let mut best_index = 0;
        for (i, rec) in records.iter().enumerate() {
            if rec.best_utility > records[best_index].best_utility {
                best_index = i;
            }
        }
        Ok(Self {
            records,
            best_index,
        })
    }
}

fn validate_opts(opts: &GaOptions) -> Result<()> {
    if opts.steps == 0 {
        return Err(CptError::UnsupportedConfig("ga steps must be at least 1"));
    }
    if opts.eta0.is_nan() || opts.eta0 <= 0.0 {
        return Err(CptError::UnsupportedConfig("ga step size must be positive"));
    }
    Ok(())
}

/// One projected-gradient-ascent run. The best-seen portfolio is seeded with
/// the projected start, so the result never falls below the starting value.
pub fn ga_optimize_single(
    start: &Portfolio,
    eval: &CptEvaluator<'_>,
    set: &ConstraintSet,
    opts: &GaOptions,
) -> Result<GaStartRecord> {
    validate_opts(opts)?;
    eval.returns().check_assets(start.weights())?;
    let half = opts.steps as f64 / 2.0;

    let projected_start = project(start.weights(), set)?;
    let mut w = projected_start.weights().to_vec();
    let mut best = w.clone();
    let mut best_utility = eval.utility(&w);
    let mut trace = Vec::with_capacity(opts.steps + 1);
    trace.push(best_utility);

    for k in 0..opts.steps {
        let grad = eval.supergradient(&w);
        if grad.iter().any(|g| !g.is_finite()) {
            return Err(CptError::NonFiniteObjective);
        }
        let eta = opts.eta0 / (1.0 + k as f64 / half);
        let proposal: Vec<f64> = w.iter().zip(&grad).map(|(&x, &g)| x + eta * g).collect();
        w = project(&proposal, set)?.into_weights();
        let u = eval.utility(&w);
        if u > best_utility {
            best_utility = u;
            best.copy_from_slice(&w);
        }
        trace.push(best_utility);
    }

    Ok(GaStartRecord {
        start: projected_start,
        best: Portfolio::from_normalized(best),
        best_utility,
        utility_trace: trace,
    })
}

/// Projected gradient ascent from each start in turn.
pub fn ga_optimize(
    starts: &[Portfolio],
    returns: &ReturnsMatrix,
    params: &CptParams,
    set: &ConstraintSet,
    opts: &GaOptions,
) -> Result<GaRun> {
    let eval = CptEvaluator::new(returns, params);
    let mut records = Vec::with_capacity(starts.len());
    for start in starts {
        records.push(ga_optimize_single(start, &eval, set, opts)?);
    }
    GaRun::from_records(records)
}

fn softmax(x: &[f64]) -> Vec<f64> {
    let max = x.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
    let exps: Vec<f64> = x.iter().map(|&xi| math::exp(xi - max)).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

/// Chain-rule gradient through the softmax map: `Jᵀg` with
/// `J_ij = w_i (δ_ij − w_j)`, i.e. `w ⊙ (g − (wᵀg)·1)`.
pub(crate) fn softmax_pullback(w: &[f64], grad: &[f64]) -> Vec<f64> {
    let wg = math::dot(w, grad);
    w.iter().zip(grad).map(|(&wi, &gi)| wi * (gi - wg)).collect()
}

/// Ascent on the unconstrained softmax parametrization of the open simplex.
/// Only the long-only feasible set is representable this way; option
/// validation happens at the caller (the CLI rejects other constraint sets).
pub fn ga_softmax_single(
    start: &Portfolio,
    eval: &CptEvaluator<'_>,
    opts: &GaOptions,
) -> Result<GaStartRecord> {
    validate_opts(opts)?;
    eval.returns().check_assets(start.weights())?;
    let half = opts.steps as f64 / 2.0;

    let mut x: Vec<f64> = start
        .weights()
        .iter()
        .map(|&wi| math::ln(wi.max(1e-12)))
        .collect();
    let mut w = softmax(&x);
    let mut best = w.clone();
    let mut best_utility = eval.utility(&w);
    let mut trace = Vec::with_capacity(opts.steps + 1);
    trace.push(best_utility);

    for k in 0..opts.steps {
        let grad = eval.supergradient(&w);
        if grad.iter().any(|g| !g.is_finite()) {
            return Err(CptError::NonFiniteObjective);
        }
        let pulled = softmax_pullback(&w, &grad);
        let eta = opts.eta0 / (1.0 + k as f64 / half);
        for (xi, gi) in x.iter_mut().zip(&pulled) {
            *xi += eta * gi;
        }
        w = softmax(&x);
        let u = eval.utility(&w);
        if u > best_utility {
            best_utility = u;
            best.copy_from_slice(&w);
        }
        trace.push(best_utility);
    }

    Ok(GaStartRecord {
        start: start.clone(),
        best: Portfolio::from_normalized(best),
        best_utility,
        utility_trace: trace,
    })
}

/// Softmax-parametrized gradient ascent from each start in turn.
pub fn ga_softmax_optimize(
    starts: &[Portfolio],
    returns: &ReturnsMatrix,
    params: &CptParams,
    opts: &GaOptions,
) -> Result<GaRun> {
    let eval = CptEvaluator::new(returns, params);
    let mut records = Vec::with_capacity(starts.len());
    for start in starts {
        records.push(ga_softmax_single(start, &eval, opts)?);
    }
    GaRun::from_records(records)
}

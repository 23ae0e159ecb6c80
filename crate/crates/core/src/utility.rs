//! The prospect-theory value function and the total CPT utility
//! `U(w) = f_{π+}(φ+(u+(Rw))) − f_{π−}(φ−(u−(Rw)))`, together with an
//! analytic supergradient.

use alloc::vec::Vec;

use crate::error::{CptError, Result};
use crate::math;
use crate::params::CptParams;
use crate::returns::{Portfolio, ReturnsMatrix};
use crate::weights::{DecisionWeights, SortContext, WeightTable};

/// S-shaped prospect-theory value of a single return:
/// `1 - exp(-γ+ x)` on gains, `-1 + exp(γ- x)` on losses.
pub fn pt_value(x: f64, params: &CptParams) -> f64 {
    if x >= 0.0 {
        1.0 - math::exp(-params.gamma_pos * x)
    } else {
        -1.0 + math::exp(params.gamma_neg * x)
    }
}

/// One-sided derivative of [`pt_value`]; at the kink the gain side is used.
pub fn pt_derivative(x: f64, params: &CptParams) -> f64 {
    if x >= 0.0 {
        params.gamma_pos * math::exp(-params.gamma_pos * x)
    } else {
        params.gamma_neg * math::exp(params.gamma_neg * x)
    }
}

/// Weighted-ordered-sum `Σ_i π_i x_(i)` over the ascending sort of `x`.
///
/// Convex in `x` when `pi` is nonnegative and nondecreasing, and invariant
/// under permutations of `x`.
pub fn dot_sort(pi: &[f64], x: &[f64]) -> Result<f64> {
    if pi.len() != x.len() {
        return Err(CptError::DimensionMismatch {
            expected: pi.len(),
            got: x.len(),
        });
    }
    let mut sorted: Vec<f64> = x.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("dot_sort arguments must not be NaN"));
    Ok(math::dot(pi, &sorted))
}

/// Total CPT utility of a portfolio over the empirical return distribution.
pub fn cpt_utility(w: &Portfolio, returns: &ReturnsMatrix, params: &CptParams) -> Result<f64> {
    returns.check_assets(w.weights())?;
    let table = WeightTable::new(returns.n_samples(), params);
    Ok(utility_with_table(w.weights(), returns, params, &table))
}

/// Analytic supergradient of the CPT utility, treating the decision weights
/// as locally constant (valid away from ties and zero crossings).
pub fn cpt_supergradient(
    w: &Portfolio,
    returns: &ReturnsMatrix,
    params: &CptParams,
) -> Result<Vec<f64>> {
    returns.check_assets(w.weights())?;
    let table = WeightTable::new(returns.n_samples(), params);
    Ok(supergradient_with_table(w.weights(), returns, params, &table))
}

pub(crate) fn utility_with_table(
    weights: &[f64],
    returns: &ReturnsMatrix,
    params: &CptParams,
    table: &WeightTable,
) -> f64 {
    let pr = returns.portfolio_returns(weights);
    let ctx = SortContext::new(&pr);
    let kappa = table.kappa(ctx.n_pos());
    ctx.sorted_returns
        .iter()
        .zip(&kappa)
        .map(|(&r, &k)| k * pt_value(r, params))
        .sum()
}

pub(crate) fn supergradient_with_table(
    weights: &[f64],
    returns: &ReturnsMatrix,
    params: &CptParams,
    table: &WeightTable,
) -> Vec<f64> {
    let pr = returns.portfolio_returns(weights);
    let ctx = SortContext::new(&pr);
    let kappa = table.kappa(ctx.n_pos());
    let n_assets = returns.n_assets();
    let mut grad = alloc::vec![0.0; n_assets];
    for (k, &row_idx) in ctx.order.iter().enumerate() {
        let coef = kappa[k] * pt_derivative(ctx.sorted_returns[k], params);
        for (g, &r) in grad.iter_mut().zip(returns.row(row_idx)) {
            *g += coef * r;
        }
    }
    grad
}

/// CPT utility with the decision weights frozen at some anchor: the samples
/// are still re-sorted at `w`, but `dw` is not recomputed. This is the
/// objective the MM minorant bounds.
pub fn fixed_pi_utility(
    dw: &DecisionWeights,
    weights: &[f64],
    returns: &ReturnsMatrix,
    params: &CptParams,
) -> f64 {
    let pr = returns.portfolio_returns(weights);
    let gains: Vec<f64> = pr
        .iter()
        .map(|&r| {
            let u = pt_value_pos(r, params);
            if u > 0.0 {
                u
            } else {
                0.0
            }
        })
        .collect();
    let losses: Vec<f64> = pr
        .iter()
        .map(|&r| {
            let u = pt_value_neg(r, params);
            if u < 0.0 {
                -u
            } else {
                0.0
            }
        })
        .collect();
    let pos = dot_sort(&dw.pi_pos, &gains).expect("frozen weights match sample count");
    let neg = dot_sort(&dw.pi_neg, &losses).expect("frozen weights match sample count");
    pos - neg
}

/// Gain-branch utility `u+` evaluated on all reals.
#[inline]
pub(crate) fn pt_value_pos(x: f64, params: &CptParams) -> f64 {
    1.0 - math::exp(-params.gamma_pos * x)
}

/// Loss-branch utility `u-` evaluated on all reals.
#[inline]
pub(crate) fn pt_value_neg(x: f64, params: &CptParams) -> f64 {
    -1.0 + math::exp(params.gamma_neg * x)
}

/// Caches the weighting-function table for one `(returns, params)` pair so
/// solver loops and grid sweeps avoid re-evaluating powers.
pub struct CptEvaluator<'a> {
    returns: &'a ReturnsMatrix,
    params: CptParams,
    table: WeightTable,
}

impl<'a> CptEvaluator<'a> {
    pub fn new(returns: &'a ReturnsMatrix, params: &CptParams) -> Self {
        Self {
            returns,
            params: *params,
            table: WeightTable::new(returns.n_samples(), params),
        }
    }

    pub fn returns(&self) -> &'a ReturnsMatrix {
        self.returns
    }

    pub fn params(&self) -> &CptParams {
        &self.params
    }

    pub fn table(&self) -> &WeightTable {
        &self.table
    }

    pub fn utility(&self, weights: &[f64]) -> f64 {
        utility_with_table(weights, self.returns, &self.params, &self.table)
    }

    pub fn supergradient(&self, weights: &[f64]) -> Vec<f64> {
        supergradient_with_table(weights, self.returns, &self.params, &self.table)
    }

    pub fn sort_context(&self, weights: &[f64]) -> SortContext {
        SortContext::new(&self.returns.portfolio_returns(weights))
    }

    pub fn decision_weights(&self, n_pos: usize) -> DecisionWeights {
        self.table.decision_weights(n_pos)
    }
}

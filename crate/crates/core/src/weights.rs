//! Rank-dependent probability reweighting: the weighting function, the
//! per-sample decision weights with monotonicity repair and zero padding,
//! and a cumulative-weight table that makes repeated evaluation cheap.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{CptError, Result};
use crate::math;
use crate::params::CptParams;

/// Probability weighting function `w(p) = p^δ / (p^δ + (1-p)^δ)^(1/δ)`.
///
/// Endpoints are returned exactly without evaluating the power expression.
pub fn weight_fn(p: f64, delta: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(CptError::ProbabilityOutOfRange(p));
    }
    if delta.is_nan() || delta <= 0.0 {
        return Err(CptError::InvalidParams("delta must be positive"));
    }
    Ok(weight_fn_unchecked(p, delta))
}

#[inline]
fn weight_fn_unchecked(p: f64, delta: f64) -> f64 {
    if p == 0.0 {
        return 0.0;
    }
    if p == 1.0 {
        return 1.0;
    }
    let pd = math::powf(p, delta);
    let qd = math::powf(1.0 - p, delta);
    pd / math::powf(pd + qd, 1.0 / delta)
}

/// Decision weights for a fixed split of `N = n_pos + n_neg` samples into
/// nonnegative and negative portfolio returns.
///
/// Both vectors have length `N` and align with the samples sorted ascending
/// by portfolio return: `pi_pos` carries `n_neg` leading zeros then the gain
/// weights (least extreme gain first), `pi_neg` carries `n_pos` leading zeros
/// then the loss weights (least extreme loss first). The nonzero tails are
/// nonnegative and nondecreasing after the monotonicity repair.
#[derive(Debug, Clone, PartialEq)]
pub struct DecisionWeights {
    pub pi_pos: Vec<f64>,
    pub pi_neg: Vec<f64>,
    pub n_pos: usize,
    pub n_neg: usize,
}

impl DecisionWeights {
    /// Combined weight per sorted sample: reversed loss tail on the loss
    /// block, gain tail on the gain block. With this layout
    /// `U^cpt(w) = Σ_i kappa[i] · u_prosp(sorted portfolio return i)`.
    pub fn kappa(&self) -> Vec<f64> {
        let n = self.pi_pos.len();
        (0..n)
            .map(|i| {
                if i < self.n_neg {
                    self.pi_neg[n - 1 - i]
                } else {
                    self.pi_pos[i]
                }
            })
            .collect()
    }
}

/// Raw (pre-repair) gain weights `π'_+` for `n_pos` of `n` samples,
/// least extreme first. `cum[j]` must hold `w_+(j/n)`.
fn raw_tail(cum: &[f64], n_pos: usize) -> Vec<f64> {
    // j-th least extreme gain (1-based j) gets w((n_pos-j+1)/n) - w((n_pos-j)/n);
    // cum[0] = w(0) = 0 makes the j = n_pos case uniform.
    (1..=n_pos)
        .map(|j| cum[n_pos - j + 1] - cum[n_pos - j])
        .collect()
}

/// Force the tail nondecreasing: every entry before the argmin (first index
/// attaining the minimum) is replaced by the minimum value.
fn repair_monotone(tail: &mut [f64]) {
    if tail.is_empty() {
        return;
    }
    let mut min_idx = 0;
    let mut min_val = tail[0];
    for (i, &v) in tail.iter().enumerate().skip(1) {
        if v < min_val {
            min_val = v;
            min_idx = i;
        }
    }
    for v in tail.iter_mut().take(min_idx) {
        *v = min_val;
    }
}

fn padded(tail: Vec<f64>, leading_zeros: usize) -> Vec<f64> {
    let mut out = vec![0.0; leading_zeros + tail.len()];
    out[leading_zeros..].copy_from_slice(&tail);
    out
}

/// Decision weights for `n_pos` nonnegative and `n_neg` negative returns.
pub fn decision_weights(n_pos: usize, n_neg: usize, params: &CptParams) -> DecisionWeights {
    let n = n_pos + n_neg;
    assert!(n >= 1, "decision weights need at least one sample");
    let table = WeightTable::new(n, params);
    table.decision_weights(n_pos)
}

/// Cumulative weighting-function values `w_±(j/N)` for `j = 0..=N`.
///
/// Building the table costs `2(N+1)` power evaluations; deriving the
/// decision weights for any gain/loss split is then O(N), which matters in
/// grid searches and solver loops that re-split every iterate.
#[derive(Debug, Clone)]
pub struct WeightTable {
    cum_pos: Vec<f64>,
    cum_neg: Vec<f64>,
}

impl WeightTable {
    pub fn new(n: usize, params: &CptParams) -> Self {
        assert!(n >= 1);
        let cum = |delta: f64| -> Vec<f64> {
            (0..=n)
                .map(|j| weight_fn_unchecked(j as f64 / n as f64, delta))
                .collect()
        };
        Self {
            cum_pos: cum(params.delta_pos),
            cum_neg: cum(params.delta_neg),
        }
    }

    pub fn n(&self) -> usize {
        self.cum_pos.len() - 1
    }

    /// Pre-repair tails; exposed for the telescoping-identity tests.
    pub fn raw_tails(&self, n_pos: usize) -> (Vec<f64>, Vec<f64>) {
        let n = self.n();
        assert!(n_pos <= n);
        (
            raw_tail(&self.cum_pos, n_pos),
            raw_tail(&self.cum_neg, n - n_pos),
        )
    }

    pub fn decision_weights(&self, n_pos: usize) -> DecisionWeights {
        let n = self.n();
        let (mut tail_pos, mut tail_neg) = self.raw_tails(n_pos);
        repair_monotone(&mut tail_pos);
        repair_monotone(&mut tail_neg);
        DecisionWeights {
            pi_pos: padded(tail_pos, n - n_pos),
            pi_neg: padded(tail_neg, n_pos),
            n_pos,
            n_neg: n - n_pos,
        }
    }

    pub fn kappa(&self, n_pos: usize) -> Vec<f64> {
        self.decision_weights(n_pos).kappa()
    }
}

/// Stable ascending sort of the portfolio returns, ties broken by original
/// row index.
#[derive(Debug, Clone)]
pub struct SortContext {
    /// `order[k]` = original row index of the k-th smallest portfolio return.
    pub order: Vec<usize>,
    /// Portfolio returns in ascending order.
    pub sorted_returns: Vec<f64>,
    /// `ranks[i]` = sorted position of original row `i` (inverse of `order`).
    pub ranks: Vec<usize>,
    /// Count of negative portfolio returns; zeros count as gains.
    pub n_neg: usize,
}

impl SortContext {
    pub fn new(portfolio_returns: &[f64]) -> Self {
        let n = portfolio_returns.len();
        let mut order: Vec<usize> = (0..n).collect();
        // sort_by is stable, so equal returns keep original row order.
        order.sort_by(|&a, &b| {
            portfolio_returns[a]
                .partial_cmp(&portfolio_returns[b])
                .expect("portfolio returns must not be NaN")
        });
        let sorted_returns: Vec<f64> = order.iter().map(|&i| portfolio_returns[i]).collect();
        let mut ranks = vec![0usize; n];
        for (k, &i) in order.iter().enumerate() {
            ranks[i] = k;
        }
        let n_neg = sorted_returns.iter().take_while(|&&r| r < 0.0).count();
        Self {
            order,
            sorted_returns,
            ranks,
            n_neg,
        }
    }

    pub fn n(&self) -> usize {
        self.order.len()
    }

    pub fn n_pos(&self) -> usize {
        self.n() - self.n_neg
    }
}

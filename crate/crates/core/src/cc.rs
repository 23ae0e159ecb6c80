//! Iterated convex-concave procedure: fix the decision weights at the
//! current iterate, split the PT utility into a concave part plus a convex
//! part, linearize the convex part at the sorted portfolio returns, and
//! maximize the resulting concave surrogate inside a trust region.
//!
//! The split requires loss aversion (`gamma_neg > gamma_pos`); otherwise the
//! "concave" part is not concave and the solver refuses to run.

use alloc::vec::Vec;

use crate::constraints::{project, ConstraintSet};
use crate::error::{CptError, Result};
use crate::math;
use crate::params::CptParams;
use crate::psg::{self, PsgSettings};
use crate::returns::{Portfolio, ReturnsMatrix};
use crate::solve::{SolveRun, Termination};
use crate::utility::CptEvaluator;
use crate::weights::SortContext;

const CC_PRECONDITION: &str = "convex-concave solver requires gamma_neg > gamma_pos";

fn require_loss_averse(params: &CptParams) -> Result<()> {
    if params.is_loss_averse() {
        Ok(())
    } else {
        Err(CptError::UnsupportedConfig(CC_PRECONDITION))
    }
}

/// Concave part of the split: `1 - exp(-γ+ x)` on gains, `γ- x` on losses.
pub fn f_ccv(x: f64, params: &CptParams) -> Result<f64> {
    require_loss_averse(params)?;
    Ok(f_ccv_raw(x, params))
}

#[inline]
fn f_ccv_raw(x: f64, params: &CptParams) -> f64 {
    if x >= 0.0 {
        1.0 - math::exp(-params.gamma_pos * x)
    } else {
        params.gamma_neg * x
    }
}

#[inline]
fn f_ccv_derivative(x: f64, params: &CptParams) -> f64 {
    if x >= 0.0 {
        params.gamma_pos * math::exp(-params.gamma_pos * x)
    } else {
        params.gamma_neg
    }
}

/// Convex remainder: zero on gains, `-1 + exp(γ- x) - γ- x` on losses.
/// Together with [`f_ccv`] this reconstitutes the PT value exactly.
pub fn f_cvx(x: f64, params: &CptParams) -> f64 {
    if x >= 0.0 {
        0.0
    } else {
        -1.0 + math::exp(params.gamma_neg * x) - params.gamma_neg * x
    }
}

/// Supporting line of [`f_cvx`] at `x_hat`: returns `(slope, intercept)`.
/// At the kink `x_hat = 0` the flat-side subgradient 0 is chosen, keeping
/// the surrogate tight on gains.
pub fn linearize_f_cvx(x_hat: f64, params: &CptParams) -> (f64, f64) {
    if x_hat >= 0.0 {
        (0.0, 0.0)
    } else {
        let slope = params.gamma_neg * (math::exp(params.gamma_neg * x_hat) - 1.0);
        let intercept = f_cvx(x_hat, params) - slope * x_hat;
        (slope, intercept)
    }
}

/// Concave surrogate of the fixed-weights CPT utility at an anchor.
///
/// `pi` is the reversed loss tail followed by the gain tail, aligned with
/// the rows of the returns matrix sorted ascending by the anchor's
/// portfolio returns (`order` maps sorted position to original row).
#[derive(Debug, Clone)]
pub struct CcSurrogate {
    pub pi: Vec<f64>,
    pub order: Vec<usize>,
    pub lin_slopes: Vec<f64>,
    pub lin_intercepts: Vec<f64>,
    pub anchor: Portfolio,
    pub trust_radius: f64,
    params: CptParams,
}

impl CcSurrogate {
    pub fn build(
        w_hat: &Portfolio,
        returns: &ReturnsMatrix,
        params: &CptParams,
        trust_radius: f64,
    ) -> Result<Self> {
        require_loss_averse(params)?;
        returns.check_assets(w_hat.weights())?;
        let eval = CptEvaluator::new(returns, params);
        Ok(Self::build_with(&eval, w_hat.weights(), trust_radius))
    }

    pub(crate) fn build_with(
        eval: &CptEvaluator<'_>,
        w_hat: &[f64],
        trust_radius: f64,
    ) -> Self {
        let params = eval.params();
        let ctx = SortContext::new(&eval.returns().portfolio_returns(w_hat));
        let pi = eval.table().kappa(ctx.n_pos());
        let mut lin_slopes = Vec::with_capacity(ctx.n());
        let mut lin_intercepts = Vec::with_capacity(ctx.n());
        for &r in &ctx.sorted_returns {
            let (slope, intercept) = linearize_f_cvx(r, params);
            lin_slopes.push(slope);
            lin_intercepts.push(intercept);
        }
        Self {
            pi,
            order: ctx.order,
            lin_slopes,
            lin_intercepts,
            anchor: Portfolio::from_normalized(w_hat.to_vec()),
            trust_radius,
            params: *params,
        }
    }

    /// `Σ_i π_i (f_ccv(wᵀρ_i) + L_i(wᵀρ_i))` with the anchor's row order.
    pub fn value(&self, returns: &ReturnsMatrix, w: &[f64]) -> f64 {
        let params = self.params;
        let pr = returns.portfolio_returns(w);
        self.order
            .iter()
            .enumerate()
            .map(|(i, &row)| {
                let t = pr[row];
                self.pi[i] * (f_ccv_raw(t, &params) + self.lin_slopes[i] * t + self.lin_intercepts[i])
            })
            .sum()
    }

    pub fn supergradient(&self, returns: &ReturnsMatrix, w: &[f64]) -> Vec<f64> {
        let params = self.params;
        let pr = returns.portfolio_returns(w);
        let mut grad = alloc::vec![0.0; returns.n_assets()];
        for (i, &row) in self.order.iter().enumerate() {
            let t = pr[row];
            let coef = self.pi[i] * (f_ccv_derivative(t, &params) + self.lin_slopes[i]);
            for (g, &r) in grad.iter_mut().zip(returns.row(row)) {
                *g += coef * r;
            }
        }
        grad
    }

    /// The fixed-weights objective the surrogate minorizes: same weights and
    /// row order, exact PT values instead of the surrogate's linearization.
    pub fn fixed_objective(&self, returns: &ReturnsMatrix, w: &[f64]) -> f64 {
        let params = self.params;
        let pr = returns.portfolio_returns(w);
        self.order
            .iter()
            .enumerate()
            .map(|(i, &row)| {
                let t = pr[row];
                self.pi[i] * (f_ccv_raw(t, &params) + f_cvx(t, &params))
            })
            .sum()
    }
}

/// Options for [`cc_optimize`].
#[derive(Debug, Clone)]
pub struct CcOptions {
    pub max_outer: usize,
    pub trust_init: f64,
    pub trust_cap: f64,
    pub trust_floor: f64,
    /// Outer stop on accepted steps: `‖w_next − ŵ‖∞ ≤ step_tol`.
    pub step_tol: f64,
    pub inner_max_iter: usize,
    pub inner_stall_tol: f64,
}

impl Default for CcOptions {
    fn default() -> Self {
        Self {
            max_outer: 200,
            trust_init: 0.1,
            trust_cap: 1.0,
            trust_floor: 1e-6,
            step_tol: 1e-7,
            inner_max_iter: 5000,
            inner_stall_tol: 1e-9,
        }
    }
}

/// One trust-region step: maximize the surrogate at `w_hat` over the
/// feasible set intersected with the `‖w − ŵ‖∞ ≤ trust_radius` box.
pub fn cc_step(
    w_hat: &Portfolio,
    returns: &ReturnsMatrix,
    params: &CptParams,
    set: &ConstraintSet,
    trust_radius: f64,
) -> Result<Portfolio> {
    require_loss_averse(params)?;
    returns.check_assets(w_hat.weights())?;
    let eval = CptEvaluator::new(returns, params);
    cc_step_with(&eval, w_hat.weights(), set, trust_radius, &PsgSettings::default())
}

fn cc_step_with(
    eval: &CptEvaluator<'_>,
    w_hat: &[f64],
    set: &ConstraintSet,
    trust_radius: f64,
    settings: &PsgSettings,
) -> Result<Portfolio> {
    let surrogate = CcSurrogate::build_with(eval, w_hat, trust_radius);
    let boxed = set.intersect_box(w_hat, trust_radius)?;
    let returns = eval.returns();
    let (w, _) = psg::maximize(
        |w| surrogate.value(returns, w),
        |w| surrogate.supergradient(returns, w),
        w_hat,
        &boxed,
        settings,
    )?;
    Ok(Portfolio::from_normalized(w))
}

/// Outer loop: recompute weights at each iterate, take a trust-region step,
/// accept only steps that improve the true CPT utility. The radius doubles
/// (capped) on acceptance and halves on rejection; the run stops when the
/// radius drops below its floor, an accepted step is within the step
/// tolerance, or the iteration budget runs out.
pub fn cc_optimize(
    w0: &Portfolio,
    returns: &ReturnsMatrix,
    params: &CptParams,
    set: &ConstraintSet,
    opts: &CcOptions,
) -> Result<SolveRun> {
    require_loss_averse(params)?;
    returns.check_assets(w0.weights())?;
    let eval = CptEvaluator::new(returns, params);
    let settings = PsgSettings {
        max_iter: opts.inner_max_iter,
        stall_tol: opts.inner_stall_tol,
    };

    let start = project(w0.weights(), set)?;
    let mut current = start.clone();
    let mut current_utility = eval.utility(current.weights());
    let mut utility_trace = alloc::vec![current_utility];
    let mut radius = opts.trust_init;
    let mut termination = Termination::MaxIterations;
    let mut iterations = 0;

    for _ in 0..opts.max_outer {
        iterations += 1;
        let next = cc_step_with(&eval, current.weights(), set, radius, &settings)?;
        let next_utility = eval.utility(next.weights());

        if next_utility > current_utility {
            let moved = current
                .weights()
                .iter()
                .zip(next.weights())
                .fold(0.0f64, |acc, (&a, &b)| acc.max(math::abs(a - b)));
            current = next;
            current_utility = next_utility;
            utility_trace.push(current_utility);
            radius = (radius * 2.0).min(opts.trust_cap);
            if moved <= opts.step_tol {
                termination = Termination::StepConverged;
                break;
            }
        } else {
            utility_trace.push(current_utility);
            radius *= 0.5;
            if radius < opts.trust_floor {
                termination = Termination::TrustRadiusFloor;
                break;
            }
        }
    }

    Ok(SolveRun {
        start,
        portfolio: current,
        utility: current_utility,
        utility_trace,
        fixed_pi_trace: Vec::new(),
        iterations,
        termination,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::utility::pt_value;
    use alloc::vec;

    fn paper() -> CptParams {
        CptParams::default()
    }

    fn toy_returns() -> ReturnsMatrix {
        ReturnsMatrix::from_rows(&[
            vec![0.02, -0.03, 0.01],
            vec![-0.04, 0.05, 0.00],
            vec![0.03, 0.02, -0.01],
            vec![-0.01, -0.02, 0.04],
            vec![0.05, 0.01, -0.02],
        ])
        .unwrap()
    }

    #[test]
    fn f_ccv_branches() {
        let p = paper();
        assert_eq!(f_ccv(0.0, &p).unwrap(), 0.0);
        assert_eq!(f_ccv(-0.2, &p).unwrap(), -0.2 * p.gamma_neg);
        assert!(f_ccv(0.1, &p).unwrap() > 0.0);
    }

    #[test]
    fn f_ccv_requires_loss_aversion() {
        let flat = CptParams::new(5.0, 5.0, 0.77, 0.79).unwrap();
        assert_eq!(
            f_ccv(0.1, &flat),
            Err(CptError::UnsupportedConfig(CC_PRECONDITION))
        );
    }

    #[test]
    fn f_ccv_midpoint_concavity() {
        let p = paper();
        let xs: Vec<f64> = (-50..=50).map(|k| k as f64 * 0.01).collect();
        for (i, &a) in xs.iter().enumerate() {
            for &b in &xs[i..] {
                let mid = f_ccv_raw(0.5 * (a + b), &p);
                let avg = 0.5 * (f_ccv_raw(a, &p) + f_ccv_raw(b, &p));
                assert!(mid >= avg - 1e-12, "concavity violated at ({a}, {b})");
            }
        }
    }

    #[test]
    fn f_cvx_zero_on_gains_and_nonnegative() {
        let p = paper();
        assert_eq!(f_cvx(0.0, &p), 0.0);
        assert_eq!(f_cvx(0.3, &p), 0.0);
        for k in 1..200 {
            assert!(f_cvx(-k as f64 * 0.01, &p) >= 0.0);
        }
    }

    #[test]
    fn split_reconstitutes_pt_value() {
        let p = paper();
        for k in 0..=1000 {
            let x = -1.0 + k as f64 * 0.002;
            let sum = f_ccv_raw(x, &p) + f_cvx(x, &p);
            assert!(
                (sum - pt_value(x, &p)).abs() <= 1e-12,
                "identity broken at {x}"
            );
        }
    }

    #[test]
    fn linearization_supports_f_cvx() {
        let p = paper();
        assert_eq!(linearize_f_cvx(0.0, &p), (0.0, 0.0));
        assert_eq!(linearize_f_cvx(0.4, &p), (0.0, 0.0));
        let anchors: Vec<f64> = (-40..=40).map(|k| k as f64 * 0.02).collect();
        for &x_hat in &anchors {
            let (slope, intercept) = linearize_f_cvx(x_hat, &p);
            assert!((slope * x_hat + intercept - f_cvx(x_hat, &p)).abs() <= 1e-12);
            for &x in &anchors {
                assert!(
                    slope * x + intercept <= f_cvx(x, &p) + 1e-12,
                    "line above f_cvx: anchor {x_hat}, point {x}"
                );
            }
        }
    }

    #[test]
    fn surrogate_tangent_at_anchor() {
        let r = toy_returns();
        let p = paper();
        let anchor = Portfolio::new(vec![0.2, 0.3, 0.5]).unwrap();
        let s = CcSurrogate::build(&anchor, &r, &p, 0.1).unwrap();
        let eval = CptEvaluator::new(&r, &p);
        let direct = eval.utility(anchor.weights());
        assert!((s.value(&r, anchor.weights()) - direct).abs() < 1e-10);
    }

    #[test]
    fn surrogate_weights_match_decision_weights() {
        let r = toy_returns();
        let p = paper();
        let anchor = Portfolio::new(vec![0.1, 0.6, 0.3]).unwrap();
        let s = CcSurrogate::build(&anchor, &r, &p, 0.1).unwrap();
        let eval = CptEvaluator::new(&r, &p);
        let ctx = eval.sort_context(anchor.weights());
        let kappa = eval.decision_weights(ctx.n_pos()).kappa();
        assert_eq!(s.pi, kappa);
    }

    #[test]
    fn surrogate_minorizes_fixed_objective() {
        let r = toy_returns();
        let p = paper();
        let anchor = Portfolio::new(vec![0.4, 0.2, 0.4]).unwrap();
        let s = CcSurrogate::build(&anchor, &r, &p, 0.1).unwrap();
        for a in 0..=10 {
            for b in 0..=(10 - a) {
                let w = [a as f64 / 10.0, b as f64 / 10.0, (10 - a - b) as f64 / 10.0];
                assert!(s.value(&r, &w) <= s.fixed_objective(&r, &w) + 1e-9);
            }
        }
    }

    #[test]
    fn cc_step_never_degrades_fixed_objective() {
        let r = toy_returns();
        let p = paper();
        let set = ConstraintSet::long_only(3).unwrap();
        let anchor = Portfolio::equal(3).unwrap();
        let s = CcSurrogate::build(&anchor, &r, &p, 0.2).unwrap();
        let next = cc_step(&anchor, &r, &p, &set, 0.2).unwrap();
        assert!(
            s.fixed_objective(&r, next.weights())
                >= s.fixed_objective(&r, anchor.weights()) - 1e-8
        );
    }

    #[test]
    fn cc_optimize_is_monotone() {
        let r = toy_returns();
        let p = paper();
        let set = ConstraintSet::long_only(3).unwrap();
        let run = cc_optimize(&Portfolio::equal(3).unwrap(), &r, &p, &set, &CcOptions::default())
            .unwrap();
        for pair in run.utility_trace.windows(2) {
            assert!(pair[1] >= pair[0] - 1e-8);
        }
        assert!(run.utility >= run.utility_trace[0]);
    }

    #[test]
    fn cc_optimize_rejects_non_loss_averse_params() {
        let r = toy_returns();
        let flat = CptParams::new(5.0, 5.0, 0.77, 0.79).unwrap();
        let set = ConstraintSet::long_only(3).unwrap();
        let res = cc_optimize(&Portfolio::equal(3).unwrap(), &r, &flat, &set, &CcOptions::default());
        assert!(matches!(res, Err(CptError::UnsupportedConfig(_))));
    }
}

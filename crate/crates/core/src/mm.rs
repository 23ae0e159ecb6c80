//! Minorization-maximization: at each outer iterate, build a concave global
//! minorant of the fixed-weights CPT utility by linearizing the convex
//! dot-sort-positive term and the convex loss utility, then maximize the
//! minorant over the feasible set.

use alloc::vec::Vec;

use crate::constraints::{project, ConstraintSet};
use crate::error::Result;
use crate::math;
use crate::params::CptParams;
use crate::psg::{self, PsgSettings};
use crate::returns::{Portfolio, ReturnsMatrix};
use crate::solve::{SolveRun, Termination};
use crate::utility::{fixed_pi_utility, pt_value_neg, pt_value_pos, CptEvaluator};
use crate::weights::SortContext;

/// Concave global minorant of the fixed-weights CPT utility at an anchor.
///
/// The gain term is replaced by its linearization `gᵀ u+(Rw)` (the
/// subgradient of dot-sort-positive is zero on rows whose gain utility is
/// negative), the loss utility is replaced elementwise by its tangent line,
/// and the outer loss reweighting is kept intact.
#[derive(Debug, Clone)]
pub struct MinorantModel {
    pub g: Vec<f64>,
    pub affine_loss_slopes: Vec<f64>,
    pub affine_loss_intercepts: Vec<f64>,
    pub pi_neg: Vec<f64>,
    pub anchor: Portfolio,
    pub constant: f64,
    gamma_pos: f64,
}

/// Build the minorant of the fixed-weights utility at `w_hat`.
pub fn build_minorant(
    w_hat: &Portfolio,
    returns: &ReturnsMatrix,
    params: &CptParams,
) -> Result<MinorantModel> {
    returns.check_assets(w_hat.weights())?;
    let eval = CptEvaluator::new(returns, params);
    Ok(build_minorant_with(&eval, w_hat.weights()))
}

pub(crate) fn build_minorant_with(eval: &CptEvaluator<'_>, w_hat: &[f64]) -> MinorantModel {
    let returns = eval.returns();
    let params = eval.params();
    let pr = returns.portfolio_returns(w_hat);
    let ctx = SortContext::new(&pr);
    let dw = eval.decision_weights(ctx.n_pos());

    let n = returns.n_samples();
    let mut g = alloc::vec![0.0; n];
    let mut slopes = alloc::vec![0.0; n];
    let mut intercepts = alloc::vec![0.0; n];
    let mut g_dot_x = 0.0;
    for i in 0..n {
        let x_i = pt_value_pos(pr[i], params);
        if x_i >= 0.0 {
            g[i] = dw.pi_pos[ctx.ranks[i]];
            g_dot_x += g[i] * x_i;
        }
        let d = params.gamma_neg * math::exp(params.gamma_neg * pr[i]);
        slopes[i] = d;
        intercepts[i] = pt_value_neg(pr[i], params) - d * pr[i];
    }

    // f_{π+}(φ+(x̂)) equals gᵀx̂ up to rounding; carry the difference so the
    // tangency at the anchor is exact.
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
    let f_pos = crate::utility::dot_sort(&dw.pi_pos, &gains).expect("lengths agree");
    let constant = f_pos - g_dot_x;

    MinorantModel {
        g,
        affine_loss_slopes: slopes,
        affine_loss_intercepts: intercepts,
        pi_neg: dw.pi_neg,
        anchor: Portfolio::from_normalized(w_hat.to_vec()),
        constant,
        gamma_pos: params.gamma_pos,
    }
}

impl MinorantModel {
    pub fn value(&self, returns: &ReturnsMatrix, w: &[f64]) -> f64 {
        let pr = returns.portfolio_returns(w);
        let mut gain_term = self.constant;
        let mut loss_args: Vec<f64> = Vec::with_capacity(pr.len());
        for (i, &r) in pr.iter().enumerate() {
            gain_term += self.g[i] * (1.0 - math::exp(-self.gamma_pos * r));
            let z = self.affine_loss_intercepts[i] + self.affine_loss_slopes[i] * r;
            loss_args.push(if z < 0.0 { -z } else { 0.0 });
        }
        let loss_term =
            crate::utility::dot_sort(&self.pi_neg, &loss_args).expect("lengths agree");
        gain_term - loss_term
    }

    pub fn supergradient(&self, returns: &ReturnsMatrix, w: &[f64]) -> Vec<f64> {
        let pr = returns.portfolio_returns(w);
        let n = pr.len();
        let gamma_pos = self.gamma_pos;

        // rank φ-(z) ascending to attach the loss weights
        let z: Vec<f64> = (0..n)
            .map(|i| self.affine_loss_intercepts[i] + self.affine_loss_slopes[i] * pr[i])
            .collect();
        let phi: Vec<f64> = z.iter().map(|&zi| if zi < 0.0 { -zi } else { 0.0 }).collect();
        let ctx = SortContext::new(&phi);

        let mut coef = alloc::vec![0.0; n];
        for i in 0..n {
            coef[i] = self.g[i] * gamma_pos * math::exp(-gamma_pos * pr[i]);
            if z[i] < 0.0 {
                coef[i] += self.pi_neg[ctx.ranks[i]] * self.affine_loss_slopes[i];
            }
        }
        let mut grad = alloc::vec![0.0; returns.n_assets()];
        for (i, row) in returns.rows().enumerate() {
            for (g, &r) in grad.iter_mut().zip(row) {
                *g += coef[i] * r;
            }
        }
        grad
    }
}

/// Options for [`mm_optimize`].
#[derive(Debug, Clone)]
pub struct MmOptions {
    pub max_outer: usize,
    /// Outer stop: `‖w_next − ŵ‖∞ ≤ step_tol`.
    pub step_tol: f64,
    pub inner_max_iter: usize,
    pub inner_stall_tol: f64,
}

impl Default for MmOptions {
    fn default() -> Self {
        Self {
            max_outer: 100,
            step_tol: 1e-7,
            inner_max_iter: 5000,
            inner_stall_tol: 1e-9,
        }
    }
}

/// Maximize the concave minorant over the feasible set by projected
/// supergradient ascent, starting from the (projected) anchor.
pub fn maximize_minorant(
    model: &MinorantModel,
    returns: &ReturnsMatrix,
    set: &ConstraintSet,
    tol: f64,
    max_iter: usize,
) -> Result<Portfolio> {
    let settings = PsgSettings {
        max_iter,
        stall_tol: tol,
    };
    let (w, _) = psg::maximize(
        |w| model.value(returns, w),
        |w| model.supergradient(returns, w),
        model.anchor.weights(),
        set,
        &settings,
    )?;
    Ok(Portfolio::from_normalized(w))
}

/// Algorithm: repeat { build minorant at ŵ, maximize it, stop when the
/// iterate stalls }. Decision weights are refreshed at every outer iterate;
/// the report traces both the true CPT utility and the fixed-weights value.
pub fn mm_optimize(
    w0: &Portfolio,
    returns: &ReturnsMatrix,
    params: &CptParams,
    set: &ConstraintSet,
    opts: &MmOptions,
) -> Result<SolveRun> {
    returns.check_assets(w0.weights())?;
    let eval = CptEvaluator::new(returns, params);
    let start = project(w0.weights(), set)?;
    let mut current = start.clone();
    let mut utility_trace = alloc::vec![eval.utility(current.weights())];
    let mut fixed_pi_trace = Vec::new();
    let mut termination = Termination::MaxIterations;
    let mut iterations = 0;

    for _ in 0..opts.max_outer {
        iterations += 1;
        let model = build_minorant_with(&eval, current.weights());
        let next = maximize_minorant(
            &model,
            returns,
            set,
            opts.inner_stall_tol,
            opts.inner_max_iter,
        )?;

        let ctx = eval.sort_context(current.weights());
        let dw = eval.decision_weights(ctx.n_pos());
        fixed_pi_trace.push(fixed_pi_utility(&dw, next.weights(), returns, params));
        utility_trace.push(eval.utility(next.weights()));

        let moved = max_abs_diff(next.weights(), current.weights());
        current = next;
        if moved <= opts.step_tol {
            termination = Termination::StepConverged;
            break;
        }
    }

    let utility = eval.utility(current.weights());
    Ok(SolveRun {
        start,
        portfolio: current,
        utility,
        utility_trace,
        fixed_pi_trace,
        iterations,
        termination,
    })
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .fold(0.0, |acc, (&x, &y)| acc.max(math::abs(x - y)))
}

#[cfg(test)]
mod tests {
    use super::*;
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
    fn minorant_is_tangent_at_anchor() {
        let r = toy_returns();
        let p = paper();
        let anchor = Portfolio::new(vec![0.2, 0.3, 0.5]).unwrap();
        let m = build_minorant(&anchor, &r, &p).unwrap();
        let eval = CptEvaluator::new(&r, &p);
        let anchored = eval.utility(anchor.weights());
        assert!((m.value(&r, anchor.weights()) - anchored).abs() < 1e-10);
    }

    #[test]
    fn minorant_stays_below_fixed_pi_utility() {
        let r = toy_returns();
        let p = paper();
        let anchor = Portfolio::new(vec![0.4, 0.4, 0.2]).unwrap();
        let m = build_minorant(&anchor, &r, &p).unwrap();
        let eval = CptEvaluator::new(&r, &p);
        let ctx = eval.sort_context(anchor.weights());
        let dw = eval.decision_weights(ctx.n_pos());
        // deterministic sweep over the simplex
        let mut k = 0;
        for a in 0..=10 {
            for b in 0..=(10 - a) {
                let w = [a as f64 / 10.0, b as f64 / 10.0, (10 - a - b) as f64 / 10.0];
                let bound = m.value(&r, &w);
                let fixed = fixed_pi_utility(&dw, &w, &r, &p);
                assert!(bound <= fixed + 1e-9, "violated at {w:?}: {bound} > {fixed}");
                k += 1;
            }
        }
        assert_eq!(k, 66);
    }

    #[test]
    fn single_gain_minorant_is_exact_utility() {
        // N=1 with a positive portfolio return: the gain term is untruncated
        // and the loss term vanishes, so m(w) = 1 - exp(-γ+ rᵀw).
        let r = ReturnsMatrix::from_rows(&[vec![0.08, 0.02]]).unwrap();
        let p = paper();
        let anchor = Portfolio::new(vec![0.5, 0.5]).unwrap();
        let m = build_minorant(&anchor, &r, &p).unwrap();
        for w in [[0.1, 0.9], [0.8, 0.2], [0.5, 0.5]] {
            let x = 0.08 * w[0] + 0.02 * w[1];
            let expected = 1.0 - math::exp(-p.gamma_pos * x);
            assert!((m.value(&r, &w) - expected).abs() < 1e-14);
        }
    }

    #[test]
    fn minorant_gradient_matches_finite_differences() {
        let r = toy_returns();
        let p = paper();
        let anchor = Portfolio::new(vec![0.3, 0.3, 0.4]).unwrap();
        let m = build_minorant(&anchor, &r, &p).unwrap();
        let w = [0.25, 0.35, 0.40];
        let grad = m.supergradient(&r, &w);
        let h = 1e-6;
        for j in 0..3 {
            let mut wp = w;
            let mut wm = w;
            wp[j] += h;
            wm[j] -= h;
            let fd = (m.value(&r, &wp) - m.value(&r, &wm)) / (2.0 * h);
            assert!(
                (grad[j] - fd).abs() <= 1e-5 * fd.abs().max(1.0),
                "coord {j}: {} vs {fd}",
                grad[j]
            );
        }
    }

    #[test]
    fn maximize_minorant_projects_an_infeasible_anchor() {
        let r = toy_returns();
        let p = paper();
        // anchor feasible for the simplex but not for the tighter box
        let anchor = Portfolio::new(vec![0.8, 0.1, 0.1]).unwrap();
        let model = build_minorant(&anchor, &r, &p).unwrap();
        let set = ConstraintSet::new(vec![0.0, 0.0, 0.0], vec![0.5, 1.0, 1.0]).unwrap();
        let w = maximize_minorant(&model, &r, &set, 1e-9, 2000).unwrap();
        assert!(crate::constraints::is_feasible(w.weights(), &set, 1e-8));
    }

    #[test]
    fn mm_run_is_monotone_in_fixed_pi() {
        let r = toy_returns();
        let p = paper();
        let set = ConstraintSet::long_only(3).unwrap();
        let w0 = Portfolio::equal(3).unwrap();
        let run = mm_optimize(&w0, &r, &p, &set, &MmOptions::default()).unwrap();
        assert!(run.utility.is_finite());
        assert!(run.utility >= run.utility_trace[0] - 1e-6);
        assert!(run.utility_trace.iter().all(|u| u.is_finite()));
    }
}

//! Feasible portfolios: the budget constraint `1ᵀw = 1` plus per-asset box
//! bounds, and the exact Euclidean projection onto that set.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{CptError, Result};
use crate::math;
use crate::returns::Portfolio;

/// Budget + box feasible set: `{ w : 1ᵀw = 1, lower ≤ w ≤ upper }`.
///
/// Bounds may be infinite (`-inf` lower / `+inf` upper). Long-only is
/// `lower = 0`, `upper = +inf`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintSet {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl ConstraintSet {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len() || lower.is_empty() {
            return Err(CptError::DimensionMismatch {
                expected: lower.len().max(1),
                got: upper.len(),
            });
        }
        for (&l, &u) in lower.iter().zip(&upper) {
            if l.is_nan() || u.is_nan() || l == f64::INFINITY || u == f64::NEG_INFINITY {
                return Err(CptError::NonFinite("constraint bounds"));
            }
            if l > u {
                return Err(CptError::InfeasibleConstraints);
            }
        }
        let lower_sum = directed_sum(&lower, f64::NEG_INFINITY);
        let upper_sum = directed_sum(&upper, f64::INFINITY);
        if lower_sum > 1.0 || upper_sum < 1.0 {
            return Err(CptError::InfeasibleConstraints);
        }
        Ok(Self { lower, upper })
    }

    /// Long-only: nonnegative weights, no caps.
    pub fn long_only(n: usize) -> Result<Self> {
        Self::new(vec![0.0; n], vec![f64::INFINITY; n])
    }

    pub fn n_assets(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn is_long_only(&self) -> bool {
        self.lower.iter().all(|&l| l == 0.0) && self.upper.iter().all(|&u| u == f64::INFINITY)
    }

    /// Intersect with the box `‖w − center‖∞ ≤ radius` (trust region).
    /// Returns an error when the intersection no longer meets the budget.
    pub fn intersect_box(&self, center: &[f64], radius: f64) -> Result<Self> {
        let lower = self
            .lower
            .iter()
            .zip(center)
            .map(|(&l, &c)| l.max(c - radius))
            .collect();
        let upper = self
            .upper
            .iter()
            .zip(center)
            .map(|(&u, &c)| u.min(c + radius))
            .collect();
        Self::new(lower, upper)
    }
}

fn directed_sum(values: &[f64], absorbing: f64) -> f64 {
    if values.contains(&absorbing) {
        absorbing
    } else {
        values.iter().sum()
    }
}

/// True iff `|1ᵀw − 1| ≤ tol` and the box bounds hold within `tol`.
pub fn is_feasible(w: &[f64], set: &ConstraintSet, tol: f64) -> bool {
    if w.len() != set.n_assets() {
        return false;
    }
    let sum: f64 = w.iter().sum();
    if math::abs(sum - 1.0) > tol {
        return false;
    }
    w.iter()
        .zip(set.lower.iter().zip(&set.upper))
        .all(|(&wi, (&l, &u))| wi >= l - tol && wi <= u + tol)
}

/// Exact Euclidean projection of `v` onto the feasible set, by bisection on
/// the scalar dual variable of the budget constraint: `w(λ) = clip(v − λ,
/// lower, upper)` with `1ᵀw(λ)` nonincreasing in `λ`.
pub fn project(v: &[f64], set: &ConstraintSet) -> Result<Portfolio> {
    if v.len() != set.n_assets() {
        return Err(CptError::DimensionMismatch {
            expected: set.n_assets(),
            got: v.len(),
        });
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(CptError::NonFinite("projection input"));
    }

    // A member of the set projects to itself. The budget slack accepted
    // here sits an order of magnitude inside the 1e-12 contract and makes
    // the projection bitwise idempotent.
    if math::abs(v.iter().sum::<f64>() - 1.0) <= 1e-13
        && v.iter()
            .zip(set.lower.iter().zip(&set.upper))
            .all(|(&vi, (&l, &u))| vi >= l && vi <= u)
    {
        return Ok(Portfolio::from_normalized(v.to_vec()));
    }

    let clip_sum = |lambda: f64| -> f64 {
        v.iter()
            .zip(set.lower.iter().zip(&set.upper))
            .map(|(&vi, (&l, &u))| (vi - lambda).clamp(l, u))
            .sum()
    };

    // Bracket the dual variable: sum(lo) >= 1 >= sum(hi).
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for (&vi, (&l, &u)) in v.iter().zip(set.lower.iter().zip(&set.upper)) {
        let lo_cand = if u.is_finite() { vi - u } else { vi - 1.0 };
        let hi_cand = if l.is_finite() { vi - l } else { vi + 1.0 };
        lo = lo.min(lo_cand);
        hi = hi.max(hi_cand);
    }
    let mut width = (hi - lo).max(1.0);
    for _ in 0..256 {
        if clip_sum(lo) >= 1.0 {
            break;
        }
        lo -= width;
        width *= 2.0;
    }
    let mut width = (hi - lo).max(1.0);
    for _ in 0..256 {
        if clip_sum(hi) <= 1.0 {
            break;
        }
        hi += width;
        width *= 2.0;
    }

    let mut lambda = 0.5 * (lo + hi);
    for _ in 0..200 {
        lambda = 0.5 * (lo + hi);
        let s = clip_sum(lambda);
        if math::abs(s - 1.0) <= 1e-13 {
            break;
        }
        if s > 1.0 {
            lo = lambda;
        } else {
            hi = lambda;
        }
        if hi - lo <= f64::EPSILON * math::abs(lambda).max(1.0) {
            break;
        }
    }

    let mut w: Vec<f64> = v
        .iter()
        .zip(set.lower.iter().zip(&set.upper))
        .map(|(&vi, (&l, &u))| (vi - lambda).clamp(l, u))
        .collect();

    // Spread the residual over coordinates strictly inside their bounds so
    // the budget holds to machine precision.
    let residual = 1.0 - w.iter().sum::<f64>();
    if residual != 0.0 {
        let margin = math::abs(residual);
        let free: Vec<usize> = (0..w.len())
            .filter(|&i| w[i] - set.lower[i] > margin && set.upper[i] - w[i] > margin)
            .collect();
        if !free.is_empty() {
            let bump = residual / free.len() as f64;
            for &i in &free {
                w[i] += bump;
            }
        }
    }

    Ok(Portfolio::from_normalized(w))
}

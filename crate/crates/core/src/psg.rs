//! Projected supergradient ascent for concave subproblems (the MM minorant
//! and the CC surrogate). Step `c/sqrt(k)` with `c` scaled to the starting
//! supergradient, best-iterate memory, and a stall test on the best value.

use alloc::vec::Vec;

use crate::constraints::{project, ConstraintSet};
use crate::error::{CptError, Result};
use crate::math;

pub struct PsgSettings {
    pub max_iter: usize,
    /// Minimum best-value improvement per 100 iterations before stopping.
    pub stall_tol: f64,
}

impl Default for PsgSettings {
    fn default() -> Self {
        Self {
            max_iter: 5000,
            stall_tol: 1e-9,
        }
    }
}

/// Maximizes a concave `objective` over `set`, starting from the projection
/// of `start`. Ties favor the incumbent, so a start that is already optimal
/// is returned unchanged.
pub fn maximize<F, G>(
    objective: F,
    supergradient: G,
    start: &[f64],
    set: &ConstraintSet,
    settings: &PsgSettings,
) -> Result<(Vec<f64>, f64)>
where
    F: Fn(&[f64]) -> f64,
    G: Fn(&[f64]) -> Vec<f64>,
{
    let mut current = project(start, set)?.into_weights();
    let mut best = current.clone();
    let mut best_value = objective(&best);
    if !best_value.is_finite() {
        return Err(CptError::NonFiniteObjective);
    }

    let g0 = supergradient(&current);
    let scale = 1.0 / (math::norm2(&g0) + 1e-12);

    let mut checkpoint_value = best_value;
    for k in 1..=settings.max_iter {
        let grad = supergradient(&current);
        if grad.iter().any(|g| !g.is_finite()) {
            return Err(CptError::NonFiniteObjective);
        }
        let step = scale / math::sqrt(k as f64);
        let proposal: Vec<f64> = current
            .iter()
            .zip(&grad)
            .map(|(&x, &g)| x + step * g)
            .collect();
        current = project(&proposal, set)?.into_weights();
        let value = objective(&current);
        if !value.is_finite() {
            return Err(CptError::NonFiniteObjective);
        }
        if value > best_value {
            best_value = value;
            best.copy_from_slice(&current);
        }
        if k % 100 == 0 {
            if best_value - checkpoint_value < settings.stall_tol {
                break;
            }
            checkpoint_value = best_value;
        }
    }
    Ok((best, best_value))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn maximizes_concave_quadratic_on_simplex() {
        // max -(w - t)^2 with target t = (0.2, 0.3, 0.5) on the simplex
        let target = [0.2, 0.3, 0.5];
        let set = ConstraintSet::long_only(3).unwrap();
        let f = |w: &[f64]| -> f64 { -w.iter().zip(&target).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() };
        let g = |w: &[f64]| -> Vec<f64> { w.iter().zip(&target).map(|(a, b)| -2.0 * (a - b)).collect() };
        let (x, v) = maximize(f, g, &[1.0, 0.0, 0.0], &set, &PsgSettings::default()).unwrap();
        assert!(v > -1e-6, "value {v}");
        for (a, b) in x.iter().zip(&target) {
            assert!((a - b).abs() < 1e-3);
        }
    }

    #[test]
    fn optimal_start_is_returned_unchanged() {
        let target = [0.25, 0.25, 0.5];
        let set = ConstraintSet::long_only(3).unwrap();
        let f = |w: &[f64]| -> f64 { -w.iter().zip(&target).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() };
        let g = |w: &[f64]| -> Vec<f64> { w.iter().zip(&target).map(|(a, b)| -2.0 * (a - b)).collect() };
        let (x, _) = maximize(f, g, &target, &set, &PsgSettings::default()).unwrap();
        assert_eq!(x, vec![0.25, 0.25, 0.5]); // exact: member projects to itself
    }
}

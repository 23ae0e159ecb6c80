//! Sample moments, the mean-variance problem `max μᵀw − γ wᵀΣw`, frontier
//! construction with volatility-equidistant sampling, and the MV heuristic
//! for CPT maximization (pick the frontier portfolio with the best CPT
//! utility).

use alloc::vec::Vec;

use crate::constraints::{project, ConstraintSet};
use crate::error::{CptError, Result};
use crate::math;
use crate::params::CptParams;
use crate::returns::{Portfolio, ReturnsMatrix};
use crate::utility::CptEvaluator;

/// Sample mean vector and unbiased covariance matrix (divisor `N − 1`).
#[derive(Debug, Clone)]
pub struct MomentEstimates {
    pub mu: Vec<f64>,
    /// Row-major `n × n`, exactly symmetric by construction.
    pub sigma: Vec<f64>,
    n: usize,
}

impl MomentEstimates {
    pub fn n_assets(&self) -> usize {
        self.n
    }

    pub fn sigma_at(&self, i: usize, j: usize) -> f64 {
        self.sigma[i * self.n + j]
    }

    /// `Σ w`.
    pub fn sigma_mul(&self, w: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| math::dot(&self.sigma[i * self.n..(i + 1) * self.n], w))
            .collect()
    }

    pub fn variance(&self, w: &[f64]) -> f64 {
        math::dot(w, &self.sigma_mul(w))
    }

    pub fn volatility(&self, w: &[f64]) -> f64 {
        math::sqrt(self.variance(w).max(0.0))
    }

    /// Largest eigenvalue of `Σ` by power iteration (200 rounds, fixed
    /// deterministic start with nonzero overlap for sign-structured
    /// matrices).
    pub fn lambda_max(&self) -> f64 {
        let n = self.n;
        let mut v: Vec<f64> = (0..n)
            .map(|i| {
                let s = if i % 2 == 0 { 1.0 } else { -1.0 };
                s * (i + 1) as f64
            })
            .collect();
        let norm = math::norm2(&v);
        for x in v.iter_mut() {
            *x /= norm;
        }
        let mut rayleigh = 0.0;
        for _ in 0..200 {
            let sv = self.sigma_mul(&v);
            let norm = math::norm2(&sv);
            if norm <= 1e-300 {
                return 0.0;
            }
            v = sv.into_iter().map(|x| x / norm).collect();
            rayleigh = math::dot(&v, &self.sigma_mul(&v));
        }
        rayleigh.max(0.0)
    }
}

/// Column means and unbiased sample covariance; needs at least two samples.
pub fn estimate_moments(returns: &ReturnsMatrix) -> Result<MomentEstimates> {
    let n_samples = returns.n_samples();
    if n_samples < 2 {
        return Err(CptError::NotEnoughSamples {
            required: 2,
            got: n_samples,
        });
    }
    let n = returns.n_assets();
    let mut mu = alloc::vec![0.0; n];
    for row in returns.rows() {
        for (m, &r) in mu.iter_mut().zip(row) {
            *m += r;
        }
    }
    for m in mu.iter_mut() {
        *m /= n_samples as f64;
    }

    let mut sigma = alloc::vec![0.0; n * n];
    let divisor = (n_samples - 1) as f64;
    for j in 0..n {
        for k in j..n {
            let mut acc = 0.0;
            for row in returns.rows() {
                acc += (row[j] - mu[j]) * (row[k] - mu[k]);
            }
            let cov = acc / divisor;
            sigma[j * n + k] = cov;
            sigma[k * n + j] = cov;
        }
    }
    Ok(MomentEstimates { mu, sigma, n })
}

/// Maximize the concave quadratic `μᵀw − γ wᵀΣw` over the feasible set by
/// projected gradient ascent with the fixed step `1 / (2γ λ_max(Σ) + 1e-12)`.
pub fn solve_mv(gamma: f64, moments: &MomentEstimates, set: &ConstraintSet) -> Result<Portfolio> {
    let start = project(&alloc::vec![1.0 / moments.n as f64; moments.n], set)?;
    solve_mv_from(gamma, moments, set, start.weights())
}

fn solve_mv_from(
    gamma: f64,
    moments: &MomentEstimates,
    set: &ConstraintSet,
    start: &[f64],
) -> Result<Portfolio> {
    if gamma <= 0.0 || !gamma.is_finite() {
        return Err(CptError::InvalidParams("risk aversion gamma must be positive"));
    }
    if start.len() != moments.n {
        return Err(CptError::DimensionMismatch {
            expected: moments.n,
            got: start.len(),
        });
    }
    let step = 1.0 / (2.0 * gamma * moments.lambda_max() + 1e-12);
    let mut w = project(start, set)?.into_weights();
    for _ in 0..100_000 {
        let sw = moments.sigma_mul(&w);
        let proposal: Vec<f64> = w
            .iter()
            .zip(moments.mu.iter().zip(&sw))
            .map(|(&wi, (&m, &s))| wi + step * (m - 2.0 * gamma * s))
            .collect();
        let next = project(&proposal, set)?.into_weights();
        let moved = w
            .iter()
            .zip(&next)
            .fold(0.0f64, |acc, (&a, &b)| acc.max(math::abs(a - b)));
        w = next;
        if moved <= 1e-10 {
            break;
        }
    }
    Ok(Portfolio::from_normalized(w))
}

/// One sampled frontier portfolio.
#[derive(Debug, Clone)]
pub struct FrontierPoint {
    pub portfolio: Portfolio,
    pub volatility: f64,
    pub mean: f64,
    pub gamma: f64,
}

/// Frontier sampled at `K` volatility-equidistant points, endpoints
/// included. `degenerate` flags a frontier whose endpoint volatilities
/// coincide (all points then repeat the minimum-variance portfolio).
#[derive(Debug, Clone)]
pub struct Frontier {
    pub points: Vec<FrontierPoint>,
    pub degenerate: bool,
}

const GAMMA_MIN_VAR: f64 = 1e6;
const GAMMA_MAX_RET: f64 = 1e-8;
const LOG_GAMMA_LO: f64 = -8.0;
const LOG_GAMMA_HI: f64 = 6.0;

/// Sample the efficient frontier at `K ≥ 2` points equally spaced in
/// volatility between the minimum-variance and maximum-return endpoints.
/// Interior targets are hit by bisection on `log10 γ` (volatility is
/// nonincreasing in `γ`); the list comes back sorted by volatility.
pub fn frontier(moments: &MomentEstimates, set: &ConstraintSet, k: usize) -> Result<Frontier> {
    if k < 2 {
        return Err(CptError::InvalidParams("frontier needs at least 2 points"));
    }
    let make_point = |portfolio: Portfolio, gamma: f64| -> FrontierPoint {
        let volatility = moments.volatility(portfolio.weights());
        let mean = math::dot(moments.mu.as_slice(), portfolio.weights());
        FrontierPoint {
            portfolio,
            volatility,
            mean,
            gamma,
        }
    };

    let min_var = make_point(solve_mv(GAMMA_MIN_VAR, moments, set)?, GAMMA_MIN_VAR);
    let max_ret = make_point(solve_mv(GAMMA_MAX_RET, moments, set)?, GAMMA_MAX_RET);
    let (vol_lo, vol_hi) = (min_var.volatility, max_ret.volatility);

    if math::abs(vol_hi - vol_lo) <= 1e-10 {
        let points = (0..k).map(|_| min_var.clone()).collect();
        return Ok(Frontier {
            points,
            degenerate: true,
        });
    }

    let mut points = Vec::with_capacity(k);
    points.push(min_var.clone());
    let gap = (vol_hi - vol_lo) / (k - 1) as f64;
    let mut warm = min_var.portfolio.weights().to_vec();
    for t in 1..k - 1 {
        let target = vol_lo + gap * t as f64;
        let point = bisect_volatility(moments, set, target, &mut warm)?;
        points.push(point);
    }
    points.push(max_ret);
    points.sort_by(|a, b| {
        a.volatility
            .partial_cmp(&b.volatility)
            .expect("volatilities are finite")
    });
    Ok(Frontier {
        points,
        degenerate: false,
    })
}

fn bisect_volatility(
    moments: &MomentEstimates,
    set: &ConstraintSet,
    target: f64,
    warm: &mut Vec<f64>,
) -> Result<FrontierPoint> {
    let mut lo = LOG_GAMMA_LO; // high volatility end
    let mut hi = LOG_GAMMA_HI; // low volatility end
    let mut best: Option<(f64, Portfolio, f64)> = None;
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        let gamma = math::powf(10.0, mid);
        let w = solve_mv_from(gamma, moments, set, warm)?;
        let vol = moments.volatility(w.weights());
        warm.copy_from_slice(w.weights());
        let err = math::abs(vol - target);
        if best.as_ref().is_none_or(|(e, _, _)| err < *e) {
            best = Some((err, w, gamma));
        }
        if err <= 1e-9 {
            break;
        }
        if vol > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let (_, portfolio, gamma) = best.expect("bisection evaluates at least once");
    let volatility = moments.volatility(portfolio.weights());
    let mean = math::dot(moments.mu.as_slice(), portfolio.weights());
    Ok(FrontierPoint {
        portfolio,
        volatility,
        mean,
        gamma,
    })
}

/// Best CPT utility along the frontier.
#[derive(Debug, Clone)]
pub struct MvHeuristicResult {
    pub portfolio: Portfolio,
    pub utility: f64,
    pub gamma: f64,
    pub degenerate: bool,
}

/// Evaluate the CPT utility on `k` frontier portfolios and keep the best
/// (first index under ties). Deterministic.
pub fn mv_heuristic(
    returns: &ReturnsMatrix,
    params: &CptParams,
    set: &ConstraintSet,
    k: usize,
) -> Result<MvHeuristicResult> {
    let moments = estimate_moments(returns)?;
    let front = frontier(&moments, set, k)?;
    let eval = CptEvaluator::new(returns, params);
    let mut best_idx = 0;
    let mut best_utility = f64::NEG_INFINITY;
    for (i, point) in front.points.iter().enumerate() {
        let u = eval.utility(point.portfolio.weights());
        if u > best_utility {
            best_utility = u;
            best_idx = i;
        }
    }
    let chosen = &front.points[best_idx];
    Ok(MvHeuristicResult {
        portfolio: chosen.portfolio.clone(),
        utility: best_utility,
        gamma: chosen.gamma,
        degenerate: front.degenerate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn moments_of_identical_rows_have_zero_covariance() {
        let r = ReturnsMatrix::from_rows(&[vec![0.01, 0.02], vec![0.01, 0.02]]).unwrap();
        let m = estimate_moments(&r).unwrap();
        assert_eq!(m.mu, vec![0.01, 0.02]);
        assert!(m.sigma.iter().all(|&s| s == 0.0));
    }

    #[test]
    fn moments_single_asset_hand_computed() {
        // values (0, 2): mean 1, unbiased variance (1 + 1) / 1 = 2
        let r = ReturnsMatrix::from_rows(&[vec![0.0], vec![2.0]]).unwrap();
        let m = estimate_moments(&r).unwrap();
        assert_eq!(m.mu, vec![1.0]);
        assert_eq!(m.sigma, vec![2.0]);
    }

    #[test]
    fn moments_need_two_samples() {
        let r = ReturnsMatrix::from_rows(&[vec![0.01]]).unwrap();
        assert!(estimate_moments(&r).is_err());
    }

    #[test]
    fn symmetric_instance_gives_equal_weights() {
        // Σ = σ² I and equal means: symmetry forces the equal-weight optimum.
        let rows = vec![
            vec![0.02, -0.01, 0.005],
            vec![-0.01, 0.005, 0.02],
            vec![0.005, 0.02, -0.01],
        ];
        let r = ReturnsMatrix::from_rows(&rows).unwrap();
        let m = estimate_moments(&r).unwrap();
        let set = ConstraintSet::long_only(3).unwrap();
        let w = solve_mv(2.0, &m, &set).unwrap();
        for &wi in w.weights() {
            assert!((wi - 1.0 / 3.0).abs() < 1e-8, "weights {:?}", w.weights());
        }
    }

    #[test]
    fn solve_mv_rejects_nonpositive_gamma() {
        let r = ReturnsMatrix::from_rows(&[vec![0.01, 0.0], vec![0.0, 0.01]]).unwrap();
        let m = estimate_moments(&r).unwrap();
        let set = ConstraintSet::long_only(2).unwrap();
        assert!(solve_mv(0.0, &m, &set).is_err());
        assert!(solve_mv(-1.0, &m, &set).is_err());
    }

    #[test]
    fn degenerate_frontier_is_flagged() {
        let r = ReturnsMatrix::from_rows(&[vec![0.01, 0.01], vec![0.01, 0.01]]).unwrap();
        let m = estimate_moments(&r).unwrap();
        let set = ConstraintSet::long_only(2).unwrap();
        let f = frontier(&m, &set, 5).unwrap();
        assert!(f.degenerate);
        assert_eq!(f.points.len(), 5);
        for p in &f.points {
            assert_eq!(p.portfolio.weights(), f.points[0].portfolio.weights());
        }
    }

    #[test]
    fn two_point_frontier_is_exactly_the_endpoints() {
        let r = ReturnsMatrix::from_rows(&[
            vec![0.05, 0.01],
            vec![-0.03, 0.005],
            vec![0.08, -0.002],
            vec![-0.01, 0.012],
        ])
        .unwrap();
        let m = estimate_moments(&r).unwrap();
        let set = ConstraintSet::long_only(2).unwrap();
        let f = frontier(&m, &set, 2).unwrap();
        assert!(!f.degenerate);
        assert_eq!(f.points.len(), 2);
        assert_eq!(f.points[0].gamma, GAMMA_MIN_VAR);
        assert_eq!(f.points[1].gamma, GAMMA_MAX_RET);
        assert!(f.points[0].volatility <= f.points[1].volatility);
    }

    #[test]
    fn heuristic_on_degenerate_frontier_returns_single_portfolio() {
        let r = ReturnsMatrix::from_rows(&[vec![0.01, 0.01], vec![0.01, 0.01]]).unwrap();
        let set = ConstraintSet::long_only(2).unwrap();
        let pick = mv_heuristic(&r, &CptParams::default(), &set, 10).unwrap();
        assert!(pick.degenerate);
        assert!(pick.utility.is_finite());
    }
}

//! Brute-force grid maximization of the CPT utility for 2 or 3 assets.
//! Serves as ground truth for the iterative solvers in tests.
//!
//! The lattice is anchored at the lower end of each coordinate's feasible
//! range, so halving the step keeps every old point (nested grids) and the
//! returned optimum can only improve under refinement.
//!
//! [`GridPlan`] splits the work into independent rows (fixed first weight)
//! so callers may evaluate rows on parallel workers and merge them by index;
//! [`grid_search`] is the sequential convenience wrapper.

use alloc::vec::Vec;

use crate::constraints::ConstraintSet;
use crate::error::{CptError, Result};
use crate::params::CptParams;
use crate::returns::{Portfolio, ReturnsMatrix};
use crate::utility::pt_value;
use crate::weights::WeightTable;

/// A feasible grid point and its utility.
#[derive(Debug, Clone)]
pub struct GridPoint {
    pub weights: Vec<f64>,
    pub utility: f64,
}

#[derive(Debug, Clone)]
pub struct GridSearchResult {
    /// Global grid maximizer (lexicographically first under exact ties).
    pub best: GridPoint,
    /// All grid points whose utility is ≥ every feasible grid neighbor.
    pub local_maxima: Vec<GridPoint>,
}

const FEAS_TOL: f64 = 1e-9;

/// Evaluates the utility over the feasible lattice with the given spacing
/// and returns the global maximizer plus all grid-local maxima. Neighbors
/// are the ±step moves that stay on the budget hyperplane: 2 for two
/// assets, 6 (hexagonal) for three.
pub fn grid_search(
    returns: &ReturnsMatrix,
    params: &CptParams,
    set: &ConstraintSet,
    step: f64,
) -> Result<GridSearchResult> {
    let plan = GridPlan::new(returns, params, set, step)?;
    let rows: Vec<Vec<f64>> = (0..plan.n_rows()).map(|i| plan.row_utilities(i)).collect();
    plan.finish(&rows)
}

/// Tight evaluation loop: scratch sort plus a kappa row per gain count,
/// precomputed once per search.
struct GridEvaluator<'a> {
    returns: &'a ReturnsMatrix,
    params: CptParams,
    kappas: Vec<Vec<f64>>,
}

impl<'a> GridEvaluator<'a> {
    fn new(returns: &'a ReturnsMatrix, params: &CptParams) -> Self {
        let table = WeightTable::new(returns.n_samples(), params);
        let kappas = (0..=returns.n_samples())
            .map(|n_pos| table.kappa(n_pos))
            .collect();
        Self {
            returns,
            params: *params,
            kappas,
        }
    }

    fn utility(&self, weights: &[f64], scratch: &mut Vec<f64>) -> f64 {
        scratch.clear();
        scratch.extend(self.returns.rows().map(|row| crate::math::dot(row, weights)));
        scratch.sort_by(|a, b| a.partial_cmp(b).expect("finite returns"));
        let n_neg = scratch.iter().take_while(|&&r| r < 0.0).count();
        let kappa = &self.kappas[scratch.len() - n_neg];
        scratch
            .iter()
            .zip(kappa)
            .map(|(&r, &k)| k * pt_value(r, &self.params))
            .sum()
    }
}

/// Feasible range of one coordinate given the bounds of the others:
/// `[max(l_i, 1 - Σ upper_others), min(u_i, 1 - Σ lower_others)]`.
fn coord_range(set: &ConstraintSet, i: usize) -> Result<(f64, f64)> {
    let mut others_upper = 0.0;
    let mut others_lower = 0.0;
    for j in 0..set.n_assets() {
        if j == i {
            continue;
        }
        others_upper += set.upper()[j];
        others_lower += set.lower()[j];
    }
    let lo = set.lower()[i].max(1.0 - others_upper);
    let hi = set.upper()[i].min(1.0 - others_lower);
    if !lo.is_finite() || !hi.is_finite() {
        return Err(CptError::UnsupportedConfig(
            "grid search requires a bounded feasible set",
        ));
    }
    Ok((lo, hi))
}

fn lattice(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let count = ((hi - lo) / step + FEAS_TOL) as usize;
    (0..=count).map(|i| lo + i as f64 * step).collect()
}

fn in_bounds(x: f64, lo: f64, hi: f64) -> bool {
    x >= lo - FEAS_TOL && x <= hi + FEAS_TOL
}

/// Validated lattice over the feasible set, split into rows along the first
/// weight. Rows are pure functions of the plan and may run concurrently;
/// [`GridPlan::finish`] reduces them deterministically.
pub struct GridPlan<'a> {
    evaluator: GridEvaluator<'a>,
    set: ConstraintSet,
    axis1: Vec<f64>,
    /// Second axis for three assets; `None` means the two-asset line.
    axis2: Option<Vec<f64>>,
}

impl<'a> GridPlan<'a> {
    pub fn new(
        returns: &'a ReturnsMatrix,
        params: &CptParams,
        set: &ConstraintSet,
        step: f64,
    ) -> Result<Self> {
        let n = returns.n_assets();
        if set.n_assets() != n {
            return Err(CptError::DimensionMismatch {
                expected: n,
                got: set.n_assets(),
            });
        }
        if !(step > 0.0 && step <= 0.1) {
            return Err(CptError::GridStep(step));
        }
        if n != 2 && n != 3 {
            return Err(CptError::GridDimension(n));
        }
        let (lo1, hi1) = coord_range(set, 0)?;
        let axis1 = lattice(lo1, hi1, step);
        let axis2 = if n == 3 {
            let (lo2, hi2) = coord_range(set, 1)?;
            Some(lattice(lo2, hi2, step))
        } else {
            None
        };
        Ok(Self {
            evaluator: GridEvaluator::new(returns, params),
            set: set.clone(),
            axis1,
            axis2,
        })
    }

    /// Two assets collapse to a single row along the first weight.
    pub fn n_rows(&self) -> usize {
        if self.axis2.is_some() {
            self.axis1.len()
        } else {
            1
        }
    }

    /// Utilities along one row; infeasible lattice points are NaN.
    pub fn row_utilities(&self, row: usize) -> Vec<f64> {
        let mut scratch = Vec::new();
        match &self.axis2 {
            None => self
                .axis1
                .iter()
                .map(|&w1| {
                    let w2 = 1.0 - w1;
                    if in_bounds(w2, self.set.lower()[1], self.set.upper()[1]) {
                        self.evaluator.utility(&[w1, w2], &mut scratch)
                    } else {
                        f64::NAN
                    }
                })
                .collect(),
            Some(axis2) => {
                let w1 = self.axis1[row];
                axis2
                    .iter()
                    .map(|&w2| {
                        let w3 = 1.0 - w1 - w2;
                        if in_bounds(w3, self.set.lower()[2], self.set.upper()[2]) {
                            self.evaluator.utility(&[w1, w2, w3], &mut scratch)
                        } else {
                            f64::NAN
                        }
                    })
                    .collect()
            }
        }
    }

    /// Scan the assembled rows for the global maximizer and local maxima.
    pub fn finish(&self, rows: &[Vec<f64>]) -> Result<GridSearchResult> {
        match &self.axis2 {
            None => self.finish_line(&rows[0]),
            Some(_) => self.finish_lattice(rows),
        }
    }

    fn weights_2(&self, i: usize) -> Vec<f64> {
        alloc::vec![self.axis1[i], 1.0 - self.axis1[i]]
    }

    fn finish_line(&self, utilities: &[f64]) -> Result<GridSearchResult> {
        let value = |i: Option<usize>| -> Option<f64> {
            let u = utilities[i?];
            if u.is_nan() {
                None
            } else {
                Some(u)
            }
        };
        let mut best: Option<(usize, f64)> = None;
        let mut local_maxima = Vec::new();
        for i in 0..utilities.len() {
            let Some(u) = value(Some(i)) else { continue };
            if best.is_none_or(|(_, b)| u > b) {
                best = Some((i, u));
            }
            let left = value(i.checked_sub(1)).is_none_or(|v| u >= v);
            let right = value(if i + 1 < utilities.len() { Some(i + 1) } else { None })
                .is_none_or(|v| u >= v);
            if left && right {
                local_maxima.push(GridPoint {
                    weights: self.weights_2(i),
                    utility: u,
                });
            }
        }
        let best = best.ok_or(CptError::InfeasibleConstraints)?;
        Ok(GridSearchResult {
            best: GridPoint {
                weights: self.weights_2(best.0),
                utility: best.1,
            },
            local_maxima,
        })
    }

    fn finish_lattice(&self, rows: &[Vec<f64>]) -> Result<GridSearchResult> {
        let axis2 = self.axis2.as_ref().expect("three-asset lattice");
        let at = |i: isize, j: isize| -> Option<f64> {
            if i < 0 || j < 0 || i as usize >= self.axis1.len() || j as usize >= axis2.len() {
                return None;
            }
            let u = rows[i as usize][j as usize];
            if u.is_nan() {
                None
            } else {
                Some(u)
            }
        };
        // moves that shift one step of mass between a pair of assets
        const NEIGHBORS: [(isize, isize); 6] =
            [(1, 0), (-1, 0), (0, 1), (0, -1), (1, -1), (-1, 1)];

        let weights_3 = |i: usize, j: usize| -> Vec<f64> {
            alloc::vec![
                self.axis1[i],
                axis2[j],
                1.0 - self.axis1[i] - axis2[j]
            ]
        };

        let mut best: Option<(usize, usize, f64)> = None;
        let mut local_maxima = Vec::new();
        for i in 0..self.axis1.len() {
            for j in 0..axis2.len() {
                let Some(u) = at(i as isize, j as isize) else {
                    continue;
                };
                if best.is_none_or(|(_, _, b)| u > b) {
                    best = Some((i, j, u));
                }
                let is_max = NEIGHBORS
                    .iter()
                    .all(|&(di, dj)| at(i as isize + di, j as isize + dj).is_none_or(|v| u >= v));
                if is_max {
                    local_maxima.push(GridPoint {
                        weights: weights_3(i, j),
                        utility: u,
                    });
                }
            }
        }
        let best = best.ok_or(CptError::InfeasibleConstraints)?;
        Ok(GridSearchResult {
            best: GridPoint {
                weights: weights_3(best.0, best.1),
                utility: best.2,
            },
            local_maxima,
        })
    }
}

impl GridSearchResult {
    pub fn best_portfolio(&self) -> Portfolio {
        Portfolio::from_normalized(self.best.weights.clone())
    }

    /// Smallest |utility − v| over all grid-local maxima.
    pub fn distance_to_local_max(&self, v: f64) -> f64 {
        self.local_maxima
            .iter()
            .map(|p| crate::math::abs(p.utility - v))
            .fold(f64::INFINITY, f64::min)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::utility::cpt_utility;
    use alloc::vec;

    fn paper() -> CptParams {
        CptParams::default()
    }

    #[test]
    fn zero_returns_pick_lexicographic_first() {
        let r = ReturnsMatrix::from_rows(&[vec![0.0, 0.0], vec![0.0, 0.0]]).unwrap();
        let set = ConstraintSet::long_only(2).unwrap();
        let res = grid_search(&r, &paper(), &set, 0.1).unwrap();
        assert_eq!(res.best.utility, 0.0);
        assert_eq!(res.best.weights, vec![0.0, 1.0]);
        // every feasible point ties, so all are local maxima
        assert_eq!(res.local_maxima.len(), 11);
    }

    #[test]
    fn dominant_asset_takes_full_weight() {
        // asset 0 beats asset 1 in every sample; monotonicity forces the corner
        let r = ReturnsMatrix::from_rows(&[
            vec![0.05, 0.01],
            vec![0.02, -0.03],
            vec![-0.01, -0.04],
        ])
        .unwrap();
        let set = ConstraintSet::new(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap();
        let res = grid_search(&r, &paper(), &set, 0.05).unwrap();
        assert_eq!(res.best.weights, vec![1.0, 0.0]);
    }

    #[test]
    fn best_dominates_every_feasible_grid_point() {
        let r = ReturnsMatrix::from_rows(&[
            vec![0.02, -0.03, 0.01],
            vec![-0.04, 0.05, 0.00],
            vec![0.03, 0.02, -0.01],
        ])
        .unwrap();
        let p = paper();
        let set = ConstraintSet::long_only(3).unwrap();
        let res = grid_search(&r, &p, &set, 0.05).unwrap();
        for a in 0..=20 {
            for b in 0..=(20 - a) {
                let w = vec![a as f64 * 0.05, b as f64 * 0.05, 1.0 - (a + b) as f64 * 0.05];
                let u = cpt_utility(&Portfolio::new(w).unwrap(), &r, &p).unwrap();
                assert!(res.best.utility >= u - 1e-12);
            }
        }
    }

    #[test]
    fn refinement_never_decreases_optimum() {
        let r = ReturnsMatrix::from_rows(&[
            vec![0.02, -0.03, 0.01],
            vec![-0.04, 0.05, 0.00],
            vec![0.03, 0.02, -0.01],
            vec![-0.01, -0.02, 0.04],
        ])
        .unwrap();
        let p = paper();
        let set = ConstraintSet::long_only(3).unwrap();
        let coarse = grid_search(&r, &p, &set, 0.05).unwrap();
        let fine = grid_search(&r, &p, &set, 0.025).unwrap();
        assert!(fine.best.utility >= coarse.best.utility - 1e-12);
    }

    #[test]
    fn rejects_unsupported_dimensions_and_steps() {
        let r = ReturnsMatrix::from_rows(&[vec![0.0; 4]]).unwrap();
        let set = ConstraintSet::long_only(4).unwrap();
        assert!(matches!(
            grid_search(&r, &paper(), &set, 0.05),
            Err(CptError::GridDimension(4))
        ));
        let r2 = ReturnsMatrix::from_rows(&[vec![0.0, 0.0]]).unwrap();
        let set2 = ConstraintSet::long_only(2).unwrap();
        assert!(matches!(
            grid_search(&r2, &paper(), &set2, 0.2),
            Err(CptError::GridStep(_))
        ));
        assert!(matches!(
            grid_search(&r2, &paper(), &set2, 0.0),
            Err(CptError::GridStep(_))
        ));
    }

    #[test]
    fn grid_matches_cpt_utility_at_points() {
        let r = ReturnsMatrix::from_rows(&[
            vec![0.03, -0.01],
            vec![-0.02, 0.04],
            vec![0.01, 0.00],
        ])
        .unwrap();
        let p = paper();
        let set = ConstraintSet::long_only(2).unwrap();
        let res = grid_search(&r, &p, &set, 0.1).unwrap();
        let direct = cpt_utility(&res.best_portfolio(), &r, &p).unwrap();
        assert!((res.best.utility - direct).abs() < 1e-14);
    }

    #[test]
    fn row_major_assembly_matches_sequential_search() {
        let r = ReturnsMatrix::from_rows(&[
            vec![0.02, -0.03, 0.01],
            vec![-0.04, 0.05, 0.00],
            vec![0.03, 0.02, -0.01],
        ])
        .unwrap();
        let p = paper();
        let set = ConstraintSet::long_only(3).unwrap();
        let plan = GridPlan::new(&r, &p, &set, 0.05).unwrap();
        // rows gathered out of order, reduced by index
        let mut rows: Vec<(usize, Vec<f64>)> = (0..plan.n_rows())
            .rev()
            .map(|i| (i, plan.row_utilities(i)))
            .collect();
        rows.sort_by_key(|(i, _)| *i);
        let rows: Vec<Vec<f64>> = rows.into_iter().map(|(_, r)| r).collect();
        let assembled = plan.finish(&rows).unwrap();
        let sequential = grid_search(&r, &p, &set, 0.05).unwrap();
        assert_eq!(assembled.best.weights, sequential.best.weights);
        assert_eq!(assembled.best.utility, sequential.best.utility);
        assert_eq!(assembled.local_maxima.len(), sequential.local_maxima.len());
    }
}

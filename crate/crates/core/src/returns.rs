use alloc::vec::Vec;

use crate::error::{CptError, Result};
use crate::math;

/// Per-period simple returns for `n_assets` assets over `n_samples` periods,
/// stored row-major (one row per period). Entries must be finite; the shape
/// is fixed at construction.
#[derive(Debug, Clone, PartialEq)]
pub struct ReturnsMatrix {
    values: Vec<f64>,
    n_samples: usize,
    n_assets: usize,
}

impl ReturnsMatrix {
    pub fn new(values: Vec<f64>, n_samples: usize, n_assets: usize) -> Result<Self> {
        if n_samples == 0 || n_assets == 0 {
            return Err(CptError::NotEnoughSamples {
                required: 1,
                got: n_samples.min(n_assets),
            });
        }
        if values.len() != n_samples * n_assets {
            return Err(CptError::DimensionMismatch {
                expected: n_samples * n_assets,
                got: values.len(),
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(CptError::NonFinite("returns matrix"));
        }
        Ok(Self {
            values,
            n_samples,
            n_assets,
        })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n_samples = rows.len();
        let n_assets = rows.first().map_or(0, Vec::len);
        let mut values = Vec::with_capacity(n_samples * n_assets);
        for row in rows {
            if row.len() != n_assets {
                return Err(CptError::DimensionMismatch {
                    expected: n_assets,
                    got: row.len(),
                });
            }
            values.extend_from_slice(row);
        }
        Self::new(values, n_samples, n_assets)
    }

    pub fn n_samples(&self) -> usize {
        self.n_samples
    }

    pub fn n_assets(&self) -> usize {
        self.n_assets
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.n_assets..(i + 1) * self.n_assets]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks_exact(self.n_assets)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Portfolio return per period: `R w`.
    pub fn portfolio_returns(&self, weights: &[f64]) -> Vec<f64> {
        self.rows().map(|row| math::dot(row, weights)).collect()
    }

    pub fn check_assets(&self, weights: &[f64]) -> Result<()> {
        if weights.len() != self.n_assets {
            return Err(CptError::DimensionMismatch {
                expected: self.n_assets,
                got: weights.len(),
            });
        }
        Ok(())
    }
}

/// Portfolio weights: fractions of total value per asset, summing to one
/// within `1e-9`.
#[derive(Debug, Clone, PartialEq)]
pub struct Portfolio {
    weights: Vec<f64>,
}

pub const BUDGET_TOL: f64 = 1e-9;

impl Portfolio {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(CptError::DimensionMismatch {
                expected: 1,
                got: 0,
            });
        }
        if weights.iter().any(|w| !w.is_finite()) {
            return Err(CptError::NonFinite("portfolio weights"));
        }
        let sum: f64 = weights.iter().sum();
        if math::abs(sum - 1.0) > BUDGET_TOL {
            return Err(CptError::BudgetViolation(sum));
        }
        Ok(Self { weights })
    }

    /// Equal weights on `n` assets.
    pub fn equal(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(CptError::DimensionMismatch {
                expected: 1,
                got: 0,
            });
        }
        Ok(Self {
            weights: alloc::vec![1.0 / n as f64; n],
        })
    }

    /// Used by routines whose output satisfies the budget by construction
    /// (e.g. the exact projection).
    pub(crate) fn from_normalized(weights: Vec<f64>) -> Self {
        debug_assert!(math::abs(weights.iter().sum::<f64>() - 1.0) <= BUDGET_TOL);
        Self { weights }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn into_weights(self) -> Vec<f64> {
        self.weights
    }
}

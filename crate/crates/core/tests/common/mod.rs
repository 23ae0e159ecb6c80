//! Shared generators for integration tests: seeded Gaussian return
//! matrices, random simplex points, and a small Cholesky helper.
#![allow(dead_code)] // each test binary uses a different subset

use cptport_core::{Portfolio, ReturnsMatrix};
use rand::Rng;
use rand_chacha::ChaCha12Rng;

pub fn rng(seed: u64) -> ChaCha12Rng {
    use rand::SeedableRng;
    ChaCha12Rng::seed_from_u64(seed)
}

/// Lower-triangular Cholesky factor of a symmetric positive definite matrix.
pub fn cholesky(n: usize, a: &[f64]) -> Vec<f64> {
    let mut l = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut s = a[i * n + j];
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k];
            }
            if i == j {
                l[i * n + j] = s.max(1e-15).sqrt();
            } else {
                l[i * n + j] = s / l[j * n + j];
            }
        }
    }
    l
}

pub fn standard_normal(rng: &mut ChaCha12Rng) -> f64 {
    // Box-Muller; u1 bounded away from zero
    let u1: f64 = loop {
        let u: f64 = rng.gen();
        if u > 1e-300 {
            break u;
        }
    };
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (2.0 * core::f64::consts::PI * u2).cos()
}

/// Seeded Gaussian returns with the given per-asset means and covariance.
pub fn gaussian_returns(
    seed: u64,
    n_samples: usize,
    means: &[f64],
    cov: &[f64],
) -> ReturnsMatrix {
    let n = means.len();
    let l = cholesky(n, cov);
    let mut r = rng(seed);
    let mut rows = Vec::with_capacity(n_samples);
    for _ in 0..n_samples {
        let z: Vec<f64> = (0..n).map(|_| standard_normal(&mut r)).collect();
        let row: Vec<f64> = (0..n)
            .map(|i| means[i] + (0..=i).map(|k| l[i * n + k] * z[k]).sum::<f64>())
            .collect();
        rows.push(row);
    }
    ReturnsMatrix::from_rows(&rows).unwrap()
}

/// Three risky assets with monthly-scale moments; multimodal under the
/// default CPT parameters for most seeds.
pub fn toy_returns(seed: u64, n_samples: usize) -> ReturnsMatrix {
    let sd = [0.012, 0.035, 0.055];
    let corr = [1.0, -0.2, -0.4, -0.2, 1.0, 0.5, -0.4, 0.5, 1.0];
    let mut cov = [0.0; 9];
    for i in 0..3 {
        for j in 0..3 {
            cov[i * 3 + j] = corr[i * 3 + j] * sd[i] * sd[j];
        }
    }
    gaussian_returns(seed, n_samples, &[0.004, 0.009, 0.014], &cov)
}

/// Uniform point on the open simplex (exponential spacings).
pub fn random_simplex(rng: &mut ChaCha12Rng, n: usize) -> Vec<f64> {
    let e: Vec<f64> = (0..n)
        .map(|_| {
            let u: f64 = loop {
                let u: f64 = rng.gen();
                if u > 0.0 {
                    break u;
                }
            };
            -u.ln()
        })
        .collect();
    let sum: f64 = e.iter().sum();
    e.into_iter().map(|x| x / sum).collect()
}

pub fn random_portfolio(rng: &mut ChaCha12Rng, n: usize) -> Portfolio {
    Portfolio::new(random_simplex(rng, n)).unwrap()
}

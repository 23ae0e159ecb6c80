//! Return-data ingestion (CSV), synthetic return generation via a Gaussian
//! mixture model, and random starting portfolios.
//!
//! CSV format: UTF-8, comma separated, one header row of asset names, one
//! row of decimal simple returns per period (0.01 = 1%), LF or CRLF.

use std::path::{Path, PathBuf};

use cptport_core::{Portfolio, ReturnsMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};
use thiserror::Error;

use crate::linalg;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: line {line}, column {column}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{path}: need a header row and at least one data row")]
    Empty { path: PathBuf },
    #[error("invalid returns: {0}")]
    BadMatrix(#[from] cptport_core::CptError),
    #[error("mixture needs at least {k} samples, got {n}")]
    TooFewSamples { k: usize, n: usize },
}

/// A parsed returns file: the matrix plus the asset names for reporting.
#[derive(Debug, Clone)]
pub struct LoadedReturns {
    pub returns: ReturnsMatrix,
    pub asset_names: Vec<String>,
}

pub fn load_returns_csv(path: &Path) -> Result<LoadedReturns, DataError> {
    let text = std::fs::read_to_string(path).map_err(|source| DataError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end_matches('\r')))
        .filter(|(_, l)| !l.trim().is_empty());

    let Some((_, header)) = lines.next() else {
        return Err(DataError::Empty {
            path: path.to_path_buf(),
        });
    };
    let asset_names: Vec<String> = header.split(',').map(|s| s.trim().to_string()).collect();
    let n_assets = asset_names.len();

    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (line_no, line) in lines {
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != n_assets {
            return Err(DataError::Parse {
                path: path.to_path_buf(),
                line: line_no,
                column: cells.len().min(n_assets) + 1,
                message: format!("expected {n_assets} fields, found {}", cells.len()),
            });
        }
        let mut row = Vec::with_capacity(n_assets);
        for (col, cell) in cells.iter().enumerate() {
            let value: f64 = cell.trim().parse().map_err(|_| DataError::Parse {
                path: path.to_path_buf(),
                line: line_no,
                column: col + 1,
                message: format!("not a number: {:?}", cell.trim()),
            })?;
            row.push(value);
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(DataError::Empty {
            path: path.to_path_buf(),
        });
    }
    let returns = ReturnsMatrix::from_rows(&rows)?;
    Ok(LoadedReturns {
        returns,
        asset_names,
    })
}

/// Writes with the shortest round-tripping float representation, so a
/// load of the output reproduces the values bit for bit.
pub fn write_returns_csv(
    path: &Path,
    asset_names: &[String],
    returns: &ReturnsMatrix,
) -> Result<(), DataError> {
    let mut out = String::new();
    out.push_str(&asset_names.join(","));
    out.push('\n');
    for row in returns.rows() {
        let cells: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    std::fs::write(path, out).map_err(|source| DataError::Io {
        path: path.to_path_buf(),
        source,
    })
}

// ---------------------------------------------------------------------
// Gaussian mixture model
// ---------------------------------------------------------------------

pub const COV_REG: f64 = 1e-10;

/// Full-covariance Gaussian mixture.
#[derive(Debug, Clone)]
pub struct GmmModel {
    /// Component weights on the probability simplex.
    pub weights: Vec<f64>,
    /// `k` mean vectors of length `n`.
    pub means: Vec<Vec<f64>>,
    /// `k` row-major `n x n` covariance matrices (regularized, symmetric).
    pub covariances: Vec<Vec<f64>>,
}

impl GmmModel {
    pub fn n_components(&self) -> usize {
        self.weights.len()
    }

    pub fn n_assets(&self) -> usize {
        self.means.first().map_or(0, Vec::len)
    }
}

#[derive(Debug, Clone)]
pub struct GmmOptions {
    pub max_iter: usize,
    /// Stop when the log-likelihood improves by less than this.
    pub tol: f64,
    pub reg: f64,
}

impl Default for GmmOptions {
    fn default() -> Self {
        Self {
            max_iter: 200,
            tol: 1e-8,
            reg: COV_REG,
        }
    }
}

/// Fit outcome: the model plus the per-iteration log-likelihood trace.
#[derive(Debug, Clone)]
pub struct GmmFit {
    pub model: GmmModel,
    pub log_likelihood: Vec<f64>,
}

/// Expectation-maximization with full covariances, k-means++ seeding of the
/// means, and per-M-step covariance regularization. Deterministic given the
/// seed.
pub fn fit_gmm(
    returns: &ReturnsMatrix,
    k: usize,
    seed: u64,
    opts: &GmmOptions,
) -> Result<GmmFit, DataError> {
    let n_samples = returns.n_samples();
    let n = returns.n_assets();
    if n_samples < k || k == 0 {
        return Err(DataError::TooFewSamples { k, n: n_samples });
    }
    let rows: Vec<&[f64]> = returns.rows().collect();
    let mut rng = ChaCha12Rng::seed_from_u64(seed);

    let mut means = kmeanspp_seeds(&rows, k, &mut rng);
    let mut weights = vec![1.0 / k as f64; k];
    let base_cov = global_covariance(returns);
    let mut covariances: Vec<Vec<f64>> = (0..k).map(|_| base_cov.clone()).collect();

    let mut log_likelihood = Vec::new();
    let mut responsibilities = vec![0.0; n_samples * k];

    for _ in 0..opts.max_iter {
        // E-step
        let chols: Vec<Vec<f64>> = covariances
            .iter()
            .map(|c| linalg::cholesky_regularized(n, c, opts.reg))
            .collect();
        let mut ll = 0.0;
        for (i, row) in rows.iter().enumerate() {
            let logs: Vec<f64> = (0..k)
                .map(|c| weights[c].ln() + linalg::mvn_log_density(n, &chols[c], &means[c], row))
                .collect();
            let max = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let lse = max + logs.iter().map(|l| (l - max).exp()).sum::<f64>().ln();
            ll += lse;
            for c in 0..k {
                responsibilities[i * k + c] = (logs[c] - lse).exp();
            }
        }

        // M-step
        for c in 0..k {
            let resp_sum: f64 = (0..n_samples).map(|i| responsibilities[i * k + c]).sum();
            weights[c] = resp_sum / n_samples as f64;
            let denom = resp_sum.max(1e-300);
            let mut mean = vec![0.0; n];
            for (i, row) in rows.iter().enumerate() {
                let r = responsibilities[i * k + c];
                for j in 0..n {
                    mean[j] += r * row[j];
                }
            }
            for m in mean.iter_mut() {
                *m /= denom;
            }
            let mut cov = vec![0.0; n * n];
            for (i, row) in rows.iter().enumerate() {
                let r = responsibilities[i * k + c];
                for a in 0..n {
                    let da = row[a] - mean[a];
                    for b in a..n {
                        cov[a * n + b] += r * da * (row[b] - mean[b]);
                    }
                }
            }
            for a in 0..n {
                for b in a..n {
                    let v = cov[a * n + b] / denom + if a == b { opts.reg } else { 0.0 };
                    cov[a * n + b] = v;
                    cov[b * n + a] = v;
                }
            }
            means[c] = mean;
            covariances[c] = cov;
        }

        let improved = log_likelihood
            .last()
            .is_none_or(|prev| ll - prev >= opts.tol);
        log_likelihood.push(ll);
        if !improved {
            break;
        }
    }

    Ok(GmmFit {
        model: GmmModel {
            weights,
            means,
            covariances,
        },
        log_likelihood,
    })
}

fn global_covariance(returns: &ReturnsMatrix) -> Vec<f64> {
    let n = returns.n_assets();
    if returns.n_samples() >= 2 {
        cptport_core::mv::estimate_moments(returns)
            .expect("two or more samples")
            .sigma
    } else {
        let mut eye = vec![0.0; n * n];
        for i in 0..n {
            eye[i * n + i] = COV_REG;
        }
        eye
    }
}

/// k-means++ seeding: first center uniform, then squared-distance sampling.
fn kmeanspp_seeds(rows: &[&[f64]], k: usize, rng: &mut ChaCha12Rng) -> Vec<Vec<f64>> {
    let first = rng.gen_range(0..rows.len());
    let mut centers: Vec<Vec<f64>> = vec![rows[first].to_vec()];
    let sqdist =
        |a: &[f64], b: &[f64]| -> f64 { a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum() };
    let mut dist2: Vec<f64> = rows.iter().map(|r| sqdist(r, &centers[0])).collect();
    while centers.len() < k {
        let total: f64 = dist2.iter().sum();
        let idx = if total > 0.0 {
            let mut u = rng.gen::<f64>() * total;
            let mut chosen = rows.len() - 1;
            for (i, &d) in dist2.iter().enumerate() {
                if u < d {
                    chosen = i;
                    break;
                }
                u -= d;
            }
            chosen
        } else {
            // all rows coincide with some center; any row works
            rng.gen_range(0..rows.len())
        };
        centers.push(rows[idx].to_vec());
        for (d, row) in dist2.iter_mut().zip(rows) {
            *d = d.min(sqdist(row, centers.last().unwrap()));
        }
    }
    centers
}

/// Draw `count` rows: component by weight, then `mean + L z` with `L` the
/// Cholesky factor of the regularized covariance. Deterministic given seed.
pub fn sample_gmm(model: &GmmModel, count: usize, seed: u64) -> Result<ReturnsMatrix, DataError> {
    let n = model.n_assets();
    let k = model.n_components();
    assert!(count >= 1, "sample count must be at least 1");
    let chols: Vec<Vec<f64>> = model
        .covariances
        .iter()
        .map(|c| linalg::cholesky_regularized(n, c, COV_REG))
        .collect();
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut rows = Vec::with_capacity(count);
    for _ in 0..count {
        let mut u = rng.gen::<f64>();
        let mut comp = k - 1;
        for (c, &w) in model.weights.iter().enumerate() {
            if u < w {
                comp = c;
                break;
            }
            u -= w;
        }
        let z: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
        let l = &chols[comp];
        let row: Vec<f64> = (0..n)
            .map(|i| model.means[comp][i] + (0..=i).map(|j| l[i * n + j] * z[j]).sum::<f64>())
            .collect();
        rows.push(row);
    }
    Ok(ReturnsMatrix::from_rows(&rows)?)
}

/// Symmetric Dirichlet starting portfolios; `alpha = 1` is uniform on the
/// open simplex. Every start is strictly positive and sums to one.
pub fn dirichlet_starts(n: usize, count: usize, alpha: f64, seed: u64) -> Vec<Portfolio> {
    assert!(n >= 1 && count >= 1);
    assert!(alpha > 0.0, "concentration must be positive");
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let gamma = (alpha != 1.0).then(|| Gamma::new(alpha, 1.0).expect("alpha > 0"));
    let mut starts = Vec::with_capacity(count);
    while starts.len() < count {
        let e: Vec<f64> = (0..n)
            .map(|_| match &gamma {
                // exponential spacings for the uniform case
                None => loop {
                    let u: f64 = rng.gen();
                    if u > 0.0 {
                        break -u.ln();
                    }
                },
                Some(g) => g.sample(&mut rng),
            })
            .collect();
        let sum: f64 = e.iter().sum();
        if sum <= 0.0 || !sum.is_finite() {
            continue;
        }
        let w: Vec<f64> = e.iter().map(|x| x / sum).collect();
        if w.iter().any(|&x| !(x > 0.0)) {
            continue;
        }
        starts.push(Portfolio::new(w).expect("normalized simplex point"));
    }
    starts
}

//! Dense symmetric helpers for the Gaussian mixture model: Cholesky with
//! escalating jitter, forward substitution, and the multivariate normal
//! log-density.

/// Lower-triangular Cholesky factor of `a + jitter I` (row-major `n x n`).
/// Returns `None` when a pivot fails even with the jitter.
pub fn cholesky(n: usize, a: &[f64], jitter: f64) -> Option<Vec<f64>> {
    let mut l = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut s = a[i * n + j];
            if i == j {
                s += jitter;
            }
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k];
            }
            if i == j {
                if s <= 0.0 {
                    return None;
                }
                l[i * n + j] = s.sqrt();
            } else {
                l[i * n + j] = s / l[j * n + j];
            }
        }
    }
    Some(l)
}

/// Cholesky with jitter escalation (x10 per retry). PSD inputs with the
/// standard 1e-10 regularization succeed on the first try.
pub fn cholesky_regularized(n: usize, a: &[f64], base_jitter: f64) -> Vec<f64> {
    let mut jitter = base_jitter;
    for _ in 0..40 {
        if let Some(l) = cholesky(n, a, jitter) {
            return l;
        }
        jitter *= 10.0;
    }
    panic!("covariance matrix is not factorizable even with large jitter");
}

/// Solve `L z = b` for lower-triangular `L`.
pub fn forward_solve(n: usize, l: &[f64], b: &[f64]) -> Vec<f64> {
    let mut z = vec![0.0; n];
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s -= l[i * n + k] * z[k];
        }
        z[i] = s / l[i * n + i];
    }
    z
}

/// `log N(x; mean, L Lᵀ)` given the Cholesky factor `L`.
pub fn mvn_log_density(n: usize, l: &[f64], mean: &[f64], x: &[f64]) -> f64 {
    let diff: Vec<f64> = x.iter().zip(mean).map(|(a, b)| a - b).collect();
    let z = forward_solve(n, l, &diff);
    let quad: f64 = z.iter().map(|v| v * v).sum();
    let log_det: f64 = (0..n).map(|i| l[i * n + i].ln()).sum::<f64>() * 2.0;
    -0.5 * (n as f64 * (2.0 * std::f64::consts::PI).ln() + log_det + quad)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn factorizes_and_solves() {
        // A = [[4, 2], [2, 3]]
        let a = [4.0, 2.0, 2.0, 3.0];
        let l = cholesky(2, &a, 0.0).unwrap();
        assert!((l[0] - 2.0).abs() < 1e-12);
        assert!((l[2] - 1.0).abs() < 1e-12);
        assert!((l[3] - 2.0f64.sqrt()).abs() < 1e-12);
        let z = forward_solve(2, &l, &[2.0, 3.0]);
        assert!((l[0] * z[0] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn jitter_rescues_singular_matrix() {
        let a = [0.0, 0.0, 0.0, 0.0];
        let l = cholesky_regularized(2, &a, 1e-10);
        assert!(l[0] > 0.0 && l[3] > 0.0);
    }

    #[test]
    fn density_matches_univariate_formula() {
        let l = cholesky(1, &[0.25], 0.0).unwrap();
        let got = mvn_log_density(1, &l, &[1.0], &[1.5]);
        let sd: f64 = 0.5;
        let want = -0.5 * ((2.0 * std::f64::consts::PI * sd * sd).ln() + (0.5 / sd) * (0.5 / sd));
        assert!((got - want).abs() < 1e-12);
    }
}

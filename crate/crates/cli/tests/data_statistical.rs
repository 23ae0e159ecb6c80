//! Seeded statistical checks for the Gaussian mixture model and the
//! Dirichlet start generator.

use cptport_cli::data::{dirichlet_starts, fit_gmm, sample_gmm, GmmModel, GmmOptions};
use cptport_core::ReturnsMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, StandardNormal};

fn gaussian_rows(
    rng: &mut ChaCha12Rng,
    count: usize,
    mean: &[f64],
    sd: &[f64],
) -> Vec<Vec<f64>> {
    (0..count)
        .map(|_| {
            mean.iter()
                .zip(sd)
                .map(|(&m, &s)| {
                    let z: f64 = StandardNormal.sample(rng);
                    m + s * z
                })
                .collect()
        })
        .collect()
}

#[test]
fn single_component_fit_recovers_the_mean() {
    let mut rng = ChaCha12Rng::seed_from_u64(100);
    let truth_mean = [0.01, -0.02];
    let truth_sd = [0.05, 0.03];
    let n = 4000;
    let rows = gaussian_rows(&mut rng, n, &truth_mean, &truth_sd);
    let returns = ReturnsMatrix::from_rows(&rows).unwrap();
    let fit = fit_gmm(&returns, 1, 0, &GmmOptions::default()).unwrap();
    for j in 0..2 {
        let se = truth_sd[j] / (n as f64).sqrt();
        let err = (fit.model.means[0][j] - truth_mean[j]).abs();
        assert!(err <= 3.0 * se, "coordinate {j}: error {err}, 3SE {}", 3.0 * se);
    }
}

#[test]
fn three_component_fit_recovers_separated_means() {
    let mut rng = ChaCha12Rng::seed_from_u64(101);
    let truth: [[f64; 2]; 3] = [[-0.5, 0.0], [0.0, 0.5], [0.5, -0.5]];
    let mut rows = Vec::new();
    for mean in &truth {
        rows.extend(gaussian_rows(&mut rng, 400, mean, &[0.05, 0.05]));
    }
    let returns = ReturnsMatrix::from_rows(&rows).unwrap();
    let fit = fit_gmm(&returns, 3, 7, &GmmOptions::default()).unwrap();

    // best assignment over all 6 permutations
    let perms: [[usize; 3]; 6] = [
        [0, 1, 2],
        [0, 2, 1],
        [1, 0, 2],
        [1, 2, 0],
        [2, 0, 1],
        [2, 1, 0],
    ];
    let max_err = perms
        .iter()
        .map(|perm| {
            perm.iter()
                .enumerate()
                .map(|(c, &t)| {
                    fit.model.means[c]
                        .iter()
                        .zip(&truth[t])
                        .map(|(a, b)| (a - b).abs())
                        .fold(0.0f64, f64::max)
                })
                .fold(0.0f64, f64::max)
        })
        .fold(f64::INFINITY, f64::min);
    assert!(max_err <= 0.05, "worst recovered-mean error {max_err}");
}

#[test]
fn log_likelihood_is_nondecreasing() {
    let mut rng = ChaCha12Rng::seed_from_u64(102);
    let mut rows = gaussian_rows(&mut rng, 300, &[0.0, 0.0], &[0.02, 0.05]);
    rows.extend(gaussian_rows(&mut rng, 300, &[0.1, -0.1], &[0.03, 0.02]));
    let returns = ReturnsMatrix::from_rows(&rows).unwrap();
    let fit = fit_gmm(&returns, 2, 3, &GmmOptions::default()).unwrap();
    assert!(fit.log_likelihood.len() >= 2);
    for pair in fit.log_likelihood.windows(2) {
        assert!(pair[1] >= pair[0] - 1e-8, "{} -> {}", pair[0], pair[1]);
    }
}

#[test]
fn gmm_samples_have_the_model_mean() {
    let model = GmmModel {
        weights: vec![0.3, 0.7],
        means: vec![vec![-0.02, 0.05], vec![0.04, -0.01]],
        covariances: vec![
            vec![4e-4, 0.0, 0.0, 9e-4],
            vec![1e-4, 0.0, 0.0, 4e-4],
        ],
    };
    let count = 100_000;
    let samples = sample_gmm(&model, count, 5).unwrap();
    // per-coordinate mixture mean and variance
    for j in 0..2 {
        let mean_j: f64 = (0..2).map(|k| model.weights[k] * model.means[k][j]).sum();
        let second: f64 = (0..2)
            .map(|k| {
                model.weights[k]
                    * (model.covariances[k][j * 2 + j] + model.means[k][j] * model.means[k][j])
            })
            .sum();
        let var_j = second - mean_j * mean_j;
        let se = (var_j / count as f64).sqrt();
        let got: f64 = samples.rows().map(|r| r[j]).sum::<f64>() / count as f64;
        assert!(
            (got - mean_j).abs() <= 3.0 * se,
            "coordinate {j}: {got} vs {mean_j} (3SE {})",
            3.0 * se
        );
    }
}

#[test]
fn dirichlet_mean_is_uniform() {
    let count = 100_000;
    let starts = dirichlet_starts(3, count, 1.0, 77);
    // Dir(1,1,1) coordinate variance is 1/18
    let se = (1.0 / 18.0 / count as f64).sqrt();
    for j in 0..3 {
        let mean: f64 = starts.iter().map(|s| s.weights()[j]).sum::<f64>() / count as f64;
        assert!(
            (mean - 1.0 / 3.0).abs() <= 3.0 * se,
            "coordinate {j}: mean {mean}"
        );
    }
}

#[test]
fn general_alpha_dirichlet_is_supported() {
    let starts = dirichlet_starts(4, 200, 5.0, 1);
    for s in &starts {
        assert!(s.weights().iter().all(|&w| w > 0.0));
        // alpha = 5 concentrates near the center
        assert!(s.weights().iter().all(|&w| w < 0.9));
    }
}

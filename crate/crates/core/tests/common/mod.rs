#![allow(dead_code)]

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use sentilogit::logit::{logistic, DesignMatrix};

/// Gaussian predictors, coefficients in [-1, 1], Bernoulli responses.
pub fn random_design(rng: &mut ChaCha8Rng, n: usize, k: usize) -> (DesignMatrix, Vec<f64>) {
    let beta: Vec<f64> = (0..=k).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..k).map(|_| StandardNormal.sample(rng)).collect())
        .collect();
    let y: Vec<f64> = rows
        .iter()
        .map(|r| {
            let eta = beta[0] + r.iter().zip(&beta[1..]).map(|(x, b)| x * b).sum::<f64>();
            f64::from(u8::from(rng.gen::<f64>() < logistic(eta)))
        })
        .collect();
    let names: Vec<String> = (1..=k).map(|j| format!("x{j}")).collect();
    (DesignMatrix::with_intercept(&rows, &names, y).unwrap(), beta)
}

/// Per-row Bernoulli log-pmf sum, straight from the definition.
pub fn brute_force_ll(beta: &[f64], data: &DesignMatrix) -> f64 {
    (0..data.n_obs())
        .map(|i| {
            let eta: f64 = data.row(i).iter().zip(beta).map(|(x, b)| x * b).sum();
            let p = 1.0 / (1.0 + (-eta).exp());
            if data.y()[i] == 1.0 {
                p.ln()
            } else {
                (1.0 - p).ln()
            }
        })
        .sum()
}

//! Seeded simulators for the statistical test suites.

use rand::Rng as _;
use rand_distr::StandardNormal;

use crate::seeds;

/// `n` i.i.d. standard normal draws.
pub fn white_noise(seed: u64, n: usize) -> Vec<f64> {
    let mut rng = seeds::rng(seed);
    (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect()
}

/// Gaussian ARMA path
/// `y_t = mean + sum phi_i (y_{t-i} - mean) + e_t + sum theta_j e_{t-j}`
/// with innovation standard deviation `sd`, after a burn-in of 200 steps.
pub fn arma(seed: u64, n: usize, phi: &[f64], theta: &[f64], mean: f64, sd: f64) -> Vec<f64> {
    const BURN: usize = 200;
    let e: Vec<f64> = white_noise(seed, n + BURN).into_iter().map(|v| v * sd).collect();
    let mut x = vec![0.0; n + BURN];
    for t in 0..n + BURN {
        let mut v = e[t];
        for (i, p) in phi.iter().enumerate() {
            if t > i {
                v += p * x[t - i - 1];
            }
        }
        for (j, q) in theta.iter().enumerate() {
            if t > j {
                v += q * e[t - j - 1];
            }
        }
        x[t] = v;
    }
    x.into_iter().skip(BURN).map(|v| v + mean).collect()
}

/// Cumulative sum of standard normal steps.
pub fn random_walk(seed: u64, n: usize) -> Vec<f64> {
    let mut acc = 0.0;
    white_noise(seed, n)
        .into_iter()
        .map(|e| {
            acc += e;
            acc
        })
        .collect()
}

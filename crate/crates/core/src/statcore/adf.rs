//! Augmented Dickey-Fuller test with a constant and no trend.
//!
//! The test regression is
//! `dy_t = a + b y_{t-1} + c_1 dy_{t-1} + ... + c_k dy_{t-k} + e_t`,
//! with `k` in `0..=max_lag` chosen by AIC on a common estimation sample and
//! the statistic taken from a refit on the full sample for that `k`.
//!
//! p-values come from MacKinnon's (1994) response-surface approximation for
//! one variable with a constant. Finite-sample critical values use the
//! MacKinnon (2010) surface `b0 + b1/T + b2/T^2 + b3/T^3`. Both tables are
//! the ones distributed with statsmodels (`tsa/adfvalues.py`).

use serde::{Deserialize, Serialize};

use super::dist::normal_cdf;
use super::linalg::{lstsq, Design};
use super::{is_constant, Result, StatError};

pub const DEFAULT_MAX_LAG: usize = 4;
pub const ALPHA: f64 = 0.05;

// MacKinnon (1994), N = 1, constant only.
const TAU_MAX: f64 = 2.74;
const TAU_MIN: f64 = -18.83;
const TAU_STAR: f64 = -1.61;
const TAU_SMALLP: [f64; 3] = [2.1659, 1.4412, 3.8269e-2];
const TAU_LARGEP: [f64; 4] = [1.7339, 9.3202e-1, -1.2745e-1, -1.0368e-2];

// MacKinnon (2010), N = 1, constant only: rows are 1%, 5%, 10%.
const CRIT_2010: [[f64; 4]; 3] =
    [[-3.43035, -6.5393, -16.786, -79.433], [-2.86154, -2.8903, -4.234, -40.040], [-2.56677, -1.5384, -2.809, 0.0]];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalValues {
    pub one_pct: f64,
    pub five_pct: f64,
    pub ten_pct: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdfResult {
    pub statistic: f64,
    pub p_value: f64,
    pub used_lag: usize,
    pub n_obs: usize,
    pub is_stationary: bool,
    pub critical_values: CriticalValues,
    /// Set for constant (or perfectly fitted) inputs where the statistic is
    /// not defined; such series are reported stationary with `p = 0`.
    pub degenerate: bool,
}

fn polyval_increasing(coef: &[f64], x: f64) -> f64 {
    coef.iter().rev().fold(0.0, |acc, c| acc * x + c)
}

/// Approximate p-value of an ADF statistic (constant, no trend).
pub fn mackinnon_p_value(stat: f64) -> f64 {
    if stat > TAU_MAX {
        return 1.0;
    }
    if stat < TAU_MIN {
        return 0.0;
    }
    let z = if stat <= TAU_STAR { polyval_increasing(&TAU_SMALLP, stat) } else { polyval_increasing(&TAU_LARGEP, stat) };
    normal_cdf(z)
}

pub fn critical_values(n_obs: usize) -> CriticalValues {
    let t = n_obs as f64;
    let cv = |r: &[f64; 4]| r[0] + r[1] / t + r[2] / (t * t) + r[3] / (t * t * t);
    CriticalValues { one_pct: cv(&CRIT_2010[0]), five_pct: cv(&CRIT_2010[1]), ten_pct: cv(&CRIT_2010[2]) }
}

/// Regression rows `i` in `start..dy.len()`, with `k` lagged differences.
fn regression(y: &[f64], dy: &[f64], k: usize, start: usize) -> (Design, Vec<f64>) {
    let mut x = Design::with_capacity(k + 2, dy.len() - start);
    let mut resp = Vec::with_capacity(dy.len() - start);
    let mut row = vec![0.0; k + 2];
    for i in start..dy.len() {
        row[0] = 1.0;
        row[1] = y[i];
        for j in 1..=k {
            row[j + 1] = dy[i - j];
        }
        x.push_row(&row);
        resp.push(dy[i]);
    }
    (x, resp)
}

fn degenerate(used_lag: usize, n_obs: usize, stationary: bool) -> AdfResult {
    AdfResult {
        statistic: if stationary { f64::NEG_INFINITY } else { 0.0 },
        p_value: if stationary { 0.0 } else { 1.0 },
        used_lag,
        n_obs,
        is_stationary: stationary,
        critical_values: critical_values(n_obs),
        degenerate: true,
    }
}

pub fn adf_test(series: &[f64], max_lag: usize) -> Result<AdfResult> {
    let n = series.len();
    if n < max_lag + 10 {
        return Err(StatError::TooShort { need: max_lag + 10, got: n });
    }
    if is_constant(series) {
        return Ok(degenerate(0, n - 1, true));
    }
    let dy: Vec<f64> = series.windows(2).map(|w| w[1] - w[0]).collect();

    // Lag choice on the common sample that the largest lag allows.
    let mut best: Option<(f64, usize)> = None;
    for k in 0..=max_lag {
        let (x, resp) = regression(series, &dy, k, max_lag);
        let Ok(fit) = lstsq(&x, &resp) else { continue };
        let m = resp.len() as f64;
        let aic = m * (fit.ssr / m).max(f64::MIN_POSITIVE).ln() + 2.0 * (k + 2) as f64;
        if best.is_none_or(|(b, _)| aic < b) {
            best = Some((aic, k));
        }
    }
    let Some((_, k)) = best else {
        return Ok(degenerate(0, dy.len() - max_lag, true));
    };

    let (x, resp) = regression(series, &dy, k, k);
    let n_obs = resp.len();
    let fit = match lstsq(&x, &resp) {
        Ok(f) => f,
        Err(_) => return Ok(degenerate(k, n_obs, true)),
    };
    let scale: f64 = resp.iter().map(|v| v * v).sum::<f64>().max(f64::MIN_POSITIVE);
    if fit.ssr <= 1e-20 * scale {
        return Ok(degenerate(k, n_obs, fit.coef[1] < 0.0));
    }
    let statistic = fit.coef[1] / fit.std_err(1);
    let p_value = mackinnon_p_value(statistic);
    Ok(AdfResult {
        statistic,
        p_value,
        used_lag: k,
        n_obs,
        is_stationary: p_value < ALPHA,
        critical_values: critical_values(n_obs),
        degenerate: false,
    })
}

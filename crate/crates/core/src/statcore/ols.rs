use serde::{Deserialize, Serialize};

use super::dist::t_two_sided;
use super::{mean, Result, StatError};

/// Simple linear regression `y = intercept + slope * x` with inference on
/// the slope.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OlsFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_se: f64,
    pub t_stat: f64,
    /// Two-sided, Student t with `n - 2` degrees of freedom.
    pub p_value: f64,
    pub r_squared: f64,
    pub n: usize,
}

pub fn ols_line(x: &[f64], y: &[f64]) -> Result<OlsFit> {
    if x.len() != y.len() {
        return Err(StatError::LengthMismatch(x.len(), y.len()));
    }
    let n = x.len();
    if n < 3 {
        return Err(StatError::TooShort { need: 3, got: n });
    }
    let (mx, my) = (mean(x), mean(y));
    let sxx: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
    if sxx <= 0.0 {
        return Err(StatError::ConstantRegressor);
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sst: f64 = y.iter().map(|v| (v - my) * (v - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ssr: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| {
            let e = b - intercept - slope * a;
            e * e
        })
        .sum();
    let dof = n - 2;
    let slope_se = (ssr / dof as f64 / sxx).sqrt();
    let (t_stat, p_value) = if slope_se > 0.0 {
        let t = slope / slope_se;
        (t, t_two_sided(t, dof)?)
    } else if slope == 0.0 {
        (0.0, 1.0)
    } else {
        (slope.signum() * f64::INFINITY, 0.0)
    };
    let r_squared = if sst > 0.0 { (1.0 - ssr / sst).clamp(0.0, 1.0) } else { 0.0 };
    Ok(OlsFit { slope, intercept, slope_se, t_stat, p_value, r_squared, n })
}

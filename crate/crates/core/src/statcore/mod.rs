//! Shared statistical machinery: least squares, distribution tails, OLS line
//! fits with inference, differencing and the augmented Dickey-Fuller test.

mod adf;
pub mod dist;
pub mod linalg;
mod ols;

use thiserror::Error;

pub use adf::{adf_test, mackinnon_p_value, AdfResult, DEFAULT_MAX_LAG};
pub use dist::{f_sf, normal_cdf, normal_quantile, t_sf};
pub use ols::{ols_line, OlsFit};

#[derive(Debug, Error, PartialEq)]
pub enum StatError {
    #[error("need at least {need} observations, got {got}")]
    TooShort { need: usize, got: usize },
    #[error("x and y lengths differ ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("regressor is constant; slope variance undefined")]
    ConstantRegressor,
    #[error("design matrix is rank deficient")]
    RankDeficient,
    #[error("argument outside the domain: {0}")]
    Domain(String),
}

pub type Result<T> = std::result::Result<T, StatError>;

/// `d`-th order forward difference; the output is `d` shorter.
pub fn difference(series: &[f64], d: usize) -> Result<Vec<f64>> {
    if series.len() <= d {
        return Err(StatError::TooShort { need: d + 1, got: series.len() });
    }
    let mut out = series.to_vec();
    for _ in 0..d {
        out = out.windows(2).map(|w| w[1] - w[0]).collect();
    }
    Ok(out)
}

/// Lag-`lag` difference `y_t - y_{t-lag}`.
pub fn lag_difference(series: &[f64], lag: usize) -> Result<Vec<f64>> {
    if series.len() <= lag {
        return Err(StatError::TooShort { need: lag + 1, got: series.len() });
    }
    Ok((lag..series.len()).map(|t| series[t] - series[t - lag]).collect())
}

pub fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

/// Population variance (divisor `n`).
pub fn variance(x: &[f64]) -> f64 {
    let m = mean(x);
    x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / x.len() as f64
}

pub fn is_constant(x: &[f64]) -> bool {
    x.windows(2).all(|w| w[0] == w[1])
}

//! Seasonal ARIMA by conditional sum of squares, order selection by grid
//! search, and horizon forecasts with 95% bands.
//!
//! With `w` the series after `d` regular and `D` seasonal differences, the
//! model is
//!
//! ```text
//! phi(B) Phi(B^s) (w_t - mu) = theta(B) Theta(B^s) e_t
//! ```
//!
//! where `phi(B) = 1 - phi_1 B - ...` and `theta(B) = 1 + theta_1 B + ...`.
//! The mean `mu` is estimated only when `d + D < 2`. Residuals before the
//! first fully observed AR window are zero, as are pre-sample innovations.

mod optim;

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use optim::{nelder_mead, Minimum, SimplexOptions};

use crate::statcore::{adf_test, difference, is_constant, lag_difference, mean, StatError, DEFAULT_MAX_LAG};

pub const SEASONAL_PERIOD: usize = 13;
pub const HORIZON: usize = 12;
pub const MAX_PQ: usize = 3;
pub const MAX_D: usize = 2;
/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;
/// Lower bound on the innovation variance of degenerate fits.
pub const SIGMA2_FLOOR: f64 = 1e-10;

#[derive(Debug, Error, PartialEq)]
pub enum ForecastError {
    #[error("invalid model order {0}")]
    InvalidSpec(String),
    #[error("series too short for {spec}: need {need} observations after differencing, got {got}")]
    TooShort { spec: String, need: usize, got: usize },
    #[error("history is empty")]
    EmptyHistory,
    #[error("history maximum is not positive; cannot normalize to peak")]
    NonPositivePeak,
    #[error(transparent)]
    Stat(#[from] StatError),
}

pub type Result<T> = std::result::Result<T, ForecastError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SeasonalOrder {
    pub p: usize,
    pub d: usize,
    pub q: usize,
    pub period: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ArimaSpec {
    pub p: usize,
    pub d: usize,
    pub q: usize,
    pub seasonal: Option<SeasonalOrder>,
}

impl ArimaSpec {
    pub fn new(p: usize, d: usize, q: usize) -> Self {
        Self { p, d, q, seasonal: None }
    }

    /// Adds seasonal terms; an all-zero seasonal order is dropped.
    pub fn with_seasonal(mut self, p: usize, d: usize, q: usize, period: usize) -> Self {
        self.seasonal = (p + d + q > 0).then_some(SeasonalOrder { p, d, q, period });
        self
    }

    fn seasonal_parts(&self) -> (usize, usize, usize, usize) {
        self.seasonal.map_or((0, 0, 0, 0), |s| (s.p, s.d, s.q, s.period))
    }

    pub fn has_intercept(&self) -> bool {
        self.d + self.seasonal_parts().1 < 2
    }

    /// Estimated mean-equation parameters (AR, MA, seasonal AR/MA, mean).
    pub fn n_params(&self) -> usize {
        let (sp, _, sq, _) = self.seasonal_parts();
        self.p + self.q + sp + sq + usize::from(self.has_intercept())
    }

    /// Observations consumed by differencing.
    pub fn diff_loss(&self) -> usize {
        let (_, sd, _, s) = self.seasonal_parts();
        self.d + sd * s
    }

    fn ar_degree(&self) -> usize {
        let (sp, _, _, s) = self.seasonal_parts();
        self.p + sp * s
    }

    /// `(p, d, q, P, D, Q)`, the order used to break exact ties.
    pub fn order_key(&self) -> (usize, usize, usize, usize, usize, usize) {
        let (sp, sd, sq, _) = self.seasonal_parts();
        (self.p, self.d, self.q, sp, sd, sq)
    }

    fn validate(&self) -> Result<()> {
        let (sp, sd, sq, s) = self.seasonal_parts();
        let ok =
            self.p <= MAX_PQ && self.q <= MAX_PQ && self.d <= MAX_D && sp <= 1 && sd <= 1 && sq <= 1 && (self.seasonal.is_none() || s >= 2);
        if ok {
            Ok(())
        } else {
            Err(ForecastError::InvalidSpec(self.to_string()))
        }
    }
}

impl fmt::Display for ArimaSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.p, self.d, self.q)?;
        if let Some(s) = self.seasonal {
            write!(f, "({},{},{})[{}]", s.p, s.d, s.q, s.period)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArimaFit {
    pub spec: ArimaSpec,
    pub ar: Vec<f64>,
    pub ma: Vec<f64>,
    pub seasonal_ar: Vec<f64>,
    pub seasonal_ma: Vec<f64>,
    pub intercept: Option<f64>,
    pub sigma2: f64,
    pub log_likelihood: f64,
    pub aic: f64,
    pub bic: f64,
    /// Residuals entering the sum of squares.
    pub n_eff: usize,
    pub converged: bool,
    /// AR polynomials stationary and MA polynomials invertible.
    pub stationary: bool,
    /// Set when the fit stands in for a failed or skipped search.
    pub fallback: bool,
}

impl ArimaFit {
    /// `a_j` in `w_t - mu = sum a_j (w_{t-j} - mu) + ...`, after expanding the
    /// seasonal product.
    pub fn expanded_ar(&self) -> Vec<f64> {
        expand(&self.ar, &self.seasonal_ar, self.spec.seasonal_parts().3, -1.0)
    }

    /// `b_j` in `... + e_t + sum b_j e_{t-j}`.
    pub fn expanded_ma(&self) -> Vec<f64> {
        expand(&self.ma, &self.seasonal_ma, self.spec.seasonal_parts().3, 1.0)
    }

    fn mu(&self) -> f64 {
        self.intercept.unwrap_or(0.0)
    }
}

fn poly_mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// Lag coefficients of `(1 + sign sum c_i B^i)(1 + sign sum C_j B^{js})`,
/// returned with the sign convention of the inputs.
fn expand(regular: &[f64], seasonal: &[f64], s: usize, sign: f64) -> Vec<f64> {
    let mut a = vec![1.0];
    a.extend(regular.iter().map(|c| sign * c));
    let mut b = vec![0.0; seasonal.len() * s + 1];
    b[0] = 1.0;
    for (j, c) in seasonal.iter().enumerate() {
        b[(j + 1) * s] = sign * c;
    }
    poly_mul(&a, &b)[1..].iter().map(|c| sign * c).collect()
}

/// True when all roots of `1 - sum a_i z^i` lie outside the unit circle,
/// by the step-down (reflection coefficient) recursion.
pub fn is_stationary(a: &[f64]) -> bool {
    let mut cur = a.to_vec();
    while let Some(&r) = cur.last() {
        if !r.is_finite() || r.abs() >= 1.0 {
            return false;
        }
        let k = cur.len();
        let denom = 1.0 - r * r;
        cur = (0..k - 1).map(|i| (cur[i] + r * cur[k - 2 - i]) / denom).collect();
    }
    true
}

/// True when all roots of `1 + sum b_i z^i` lie outside the unit circle.
pub fn is_invertible(b: &[f64]) -> bool {
    let neg: Vec<f64> = b.iter().map(|v| -v).collect();
    is_stationary(&neg)
}

/// Applies the spec's regular then seasonal differences.
pub fn apply_differencing(series: &[f64], spec: &ArimaSpec) -> Result<Vec<f64>> {
    let mut w = difference(series, spec.d)?;
    let (_, sd, _, s) = spec.seasonal_parts();
    for _ in 0..sd {
        w = lag_difference(&w, s)?;
    }
    Ok(w)
}

/// CSS residuals on the differenced series; entries before `ar.len()` are
/// zero.
fn css_residuals(w: &[f64], mu: f64, ar: &[f64], ma: &[f64]) -> Vec<f64> {
    let t0 = ar.len();
    let mut e = vec![0.0; w.len()];
    for t in t0..w.len() {
        let mut v = w[t] - mu;
        for (j, a) in ar.iter().enumerate() {
            v -= a * (w[t - j - 1] - mu);
        }
        for (j, b) in ma.iter().enumerate() {
            if t > t0 + j {
                v -= b * e[t - j - 1];
            }
        }
        e[t] = v;
    }
    e
}

struct Params<'a> {
    ar: &'a [f64],
    ma: &'a [f64],
    sar: &'a [f64],
    sma: &'a [f64],
    mu: f64,
}

fn unpack<'a>(spec: &ArimaSpec, x: &'a [f64]) -> Params<'a> {
    let (sp, _, sq, _) = spec.seasonal_parts();
    let (ar, rest) = x.split_at(spec.p);
    let (ma, rest) = rest.split_at(spec.q);
    let (sar, rest) = rest.split_at(sp);
    let (sma, rest) = rest.split_at(sq);
    Params { ar, ma, sar, sma, mu: rest.first().copied().unwrap_or(0.0) }
}

fn admissible(p: &Params<'_>) -> bool {
    is_stationary(p.ar) && is_stationary(p.sar) && is_invertible(p.ma) && is_invertible(p.sma)
}

fn css(spec: &ArimaSpec, w: &[f64], x: &[f64]) -> f64 {
    let p = unpack(spec, x);
    if !admissible(&p) {
        return f64::INFINITY;
    }
    let s = spec.seasonal_parts().3;
    let ar = expand(p.ar, p.sar, s, -1.0);
    let ma = expand(p.ma, p.sma, s, 1.0);
    css_residuals(w, p.mu, &ar, &ma).iter().map(|e| e * e).sum()
}

fn information(n_eff: usize, css: f64, k: usize) -> (f64, f64, f64, f64) {
    let n = n_eff as f64;
    let sigma2 = (css / n).max(SIGMA2_FLOOR);
    let loglik = -0.5 * n * ((2.0 * std::f64::consts::PI * sigma2).ln() + 1.0);
    let k = (k + 1) as f64;
    (sigma2, loglik, 2.0 * k - 2.0 * loglik, k * n.ln() - 2.0 * loglik)
}

/// Fits `spec` by minimizing the conditional sum of squares.
pub fn fit_arima(series: &[f64], spec: &ArimaSpec) -> Result<ArimaFit> {
    spec.validate()?;
    let w = apply_differencing(series, spec)?;
    let k = spec.n_params();
    let need = (5 * k).max(spec.ar_degree() + 2);
    if w.len() < need {
        return Err(ForecastError::TooShort { spec: spec.to_string(), need, got: w.len() });
    }

    let w_mean = mean(&w);
    let w_sd = crate::statcore::variance(&w).sqrt();
    let mut x0 = vec![0.0; k];
    let mut step = vec![0.1; k];
    if spec.has_intercept() {
        x0[k - 1] = w_mean;
        step[k - 1] = 0.1 * w_sd + 1e-3 * (w_mean.abs() + 1.0);
    }
    let objective = |x: &[f64]| css(spec, &w, x);
    let opts = SimplexOptions::default();
    let mut best = nelder_mead(objective, &x0, &step, opts);
    if !best.converged {
        let restart: Vec<f64> = best.x.iter().enumerate().map(|(i, v)| v + if i % 2 == 0 { 0.05 } else { -0.05 } * step[i] / 0.1).collect();
        let second = nelder_mead(objective, &restart, &step, opts);
        let converged = second.converged;
        if second.value <= best.value {
            best = second;
        }
        best.converged = converged;
    }

    let p = unpack(spec, &best.x);
    let stationary = admissible(&p);
    let n_eff = w.len() - spec.ar_degree();
    let (sigma2, log_likelihood, aic, bic) = information(n_eff, best.value, k);
    Ok(ArimaFit {
        spec: *spec,
        ar: p.ar.to_vec(),
        ma: p.ma.to_vec(),
        seasonal_ar: p.sar.to_vec(),
        seasonal_ma: p.sma.to_vec(),
        intercept: spec.has_intercept().then_some(p.mu),
        sigma2,
        log_likelihood,
        aic,
        bic,
        n_eff,
        converged: best.converged && best.value.is_finite(),
        stationary,
        fallback: false,
    })
}

/// Closed-form `(0, d, 0)` fit: the mean (when estimated) and the variance
/// of the differenced series.
pub fn fit_fallback(series: &[f64], d: usize) -> Result<ArimaFit> {
    let spec = ArimaSpec::new(0, d.min(MAX_D), 0);
    let w = apply_differencing(series, &spec)?;
    let mu = if spec.has_intercept() { mean(&w) } else { 0.0 };
    let sum_sq: f64 = w.iter().map(|v| (v - mu) * (v - mu)).sum();
    let (sigma2, log_likelihood, aic, bic) = information(w.len(), sum_sq, spec.n_params());
    Ok(ArimaFit {
        spec,
        ar: Vec::new(),
        ma: Vec::new(),
        seasonal_ar: Vec::new(),
        seasonal_ma: Vec::new(),
        intercept: spec.has_intercept().then_some(mu),
        sigma2,
        log_likelihood,
        aic,
        bic,
        n_eff: w.len(),
        converged: true,
        stationary: true,
        fallback: true,
    })
}

/// One-step in-sample residuals of `fit` on `series` (after differencing;
/// the conditioning prefix is dropped).
pub fn in_sample_residuals(fit: &ArimaFit, series: &[f64]) -> Result<Vec<f64>> {
    let w = apply_differencing(series, &fit.spec)?;
    let ar = fit.expanded_ar();
    let e = css_residuals(&w, fit.mu(), &ar, &fit.expanded_ma());
    Ok(e[ar.len().min(e.len())..].to_vec())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridOptions {
    pub seasonal: bool,
    pub period: usize,
    pub max_p: usize,
    pub max_q: usize,
    pub adf_max_lag: usize,
}

impl Default for GridOptions {
    fn default() -> Self {
        Self { seasonal: false, period: SEASONAL_PERIOD, max_p: MAX_PQ, max_q: MAX_PQ, adf_max_lag: DEFAULT_MAX_LAG }
    }
}

impl GridOptions {
    pub fn seasonal() -> Self {
        Self { seasonal: true, ..Self::default() }
    }
}

/// Smallest `d` in `0..=2` for which the ADF test rejects a unit root;
/// 2 when none does.
pub fn select_d(series: &[f64], adf_max_lag: usize) -> usize {
    let mut w = series.to_vec();
    for d in 0..MAX_D {
        if adf_test(&w, adf_max_lag).is_ok_and(|r| r.is_stationary) {
            return d;
        }
        w = w.windows(2).map(|v| v[1] - v[0]).collect();
    }
    MAX_D
}

/// Candidate orders in tie-break order.
pub fn grid_specs(d: usize, opts: &GridOptions) -> Vec<ArimaSpec> {
    let seasonal: Vec<(usize, usize, usize)> =
        if opts.seasonal { (0..8).map(|b| ((b >> 2) & 1, (b >> 1) & 1, b & 1)).collect() } else { vec![(0, 0, 0)] };
    let mut specs = Vec::new();
    for p in 0..=opts.max_p {
        for q in 0..=opts.max_q {
            for &(sp, sd, sq) in &seasonal {
                specs.push(ArimaSpec::new(p, d, q).with_seasonal(sp, sd, sq, opts.period));
            }
        }
    }
    specs.sort_by_key(ArimaSpec::order_key);
    specs
}

fn acceptable(fit: &ArimaFit, n: usize) -> bool {
    let k = fit.spec.n_params();
    fit.converged && fit.stationary && fit.aic.is_finite() && 4 * k < n && n >= 5 * k
}

/// Best converged fit by AIC, then BIC, then fewer parameters, then order.
/// Falls back to `(0, d, 0)` when nothing qualifies or the series is
/// constant.
pub fn grid_search(series: &[f64], opts: &GridOptions) -> Result<ArimaFit> {
    if series.is_empty() {
        return Err(ForecastError::EmptyHistory);
    }
    if is_constant(series) {
        return fit_fallback(series, 0);
    }
    let d = select_d(series, opts.adf_max_lag);
    let specs = grid_specs(d, opts);
    let fits: Vec<Option<ArimaFit>> = specs.par_iter().map(|s| fit_arima(series, s).ok().filter(|f| acceptable(f, series.len()))).collect();
    let mut best: Option<ArimaFit> = None;
    for fit in fits.into_iter().flatten() {
        let better = match &best {
            None => true,
            Some(b) => {
                let key = |f: &ArimaFit| (f.aic, f.bic, f.spec.n_params());
                let (a, c) = (key(&fit), key(b));
                a.0.total_cmp(&c.0).then(a.1.total_cmp(&c.1)).then(a.2.cmp(&c.2)).is_lt()
            }
        };
        if better {
            best = Some(fit);
        }
    }
    match best {
        Some(b) => Ok(b),
        None => fit_fallback(series, d),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Forecast {
    pub horizon: usize,
    pub mean: Vec<f64>,
    pub lower95: Vec<f64>,
    pub upper95: Vec<f64>,
}

impl Forecast {
    /// Means and bands floored at zero, for count series.
    pub fn floored(&self) -> Forecast {
        let f = |v: &Vec<f64>| v.iter().map(|x| if x.is_finite() { x.max(0.0) } else { 0.0 }).collect();
        Forecast { horizon: self.horizon, mean: f(&self.mean), lower95: f(&self.lower95), upper95: f(&self.upper95) }
    }
}

/// `psi_0..psi_{h-1}` of `b(B) / a(B)` with `a(B) = 1 - sum a_i B^i`.
pub fn psi_weights(ar: &[f64], ma: &[f64], h: usize) -> Vec<f64> {
    let mut psi = vec![0.0; h];
    if h == 0 {
        return psi;
    }
    psi[0] = 1.0;
    for j in 1..h {
        let mut v = ma.get(j - 1).copied().unwrap_or(0.0);
        for i in 1..=j.min(ar.len()) {
            v += ar[i - 1] * psi[j - i];
        }
        psi[j] = v;
    }
    psi
}

/// Multi-step forecast of `history` under `fit`, future innovations zero.
pub fn forecast(fit: &ArimaFit, history: &[f64], horizon: usize) -> Result<Forecast> {
    if history.is_empty() {
        return Err(ForecastError::EmptyHistory);
    }
    let (_, sd, _, s) = fit.spec.seasonal_parts();
    let ar = fit.expanded_ar();
    let ma = fit.expanded_ma();

    // Integrated AR polynomial in y: a(B) (1 - B)^d (1 - B^s)^D.
    let mut poly = vec![1.0];
    poly.extend(ar.iter().map(|a| -a));
    for _ in 0..fit.spec.d {
        poly = poly_mul(&poly, &[1.0, -1.0]);
    }
    for _ in 0..sd {
        let mut seasonal = vec![0.0; s + 1];
        seasonal[0] = 1.0;
        seasonal[s] = -1.0;
        poly = poly_mul(&poly, &seasonal);
    }
    let big_ar: Vec<f64> = poly[1..].iter().map(|c| -c).collect();
    let constant = fit.mu() * (1.0 - ar.iter().sum::<f64>());

    let offset = fit.spec.diff_loss();
    let e_w = if history.len() > offset {
        let w = apply_differencing(history, &fit.spec)?;
        css_residuals(&w, fit.mu(), &ar, &ma)
    } else {
        Vec::new()
    };
    let n = history.len();
    let innovation = |t: usize| if t >= offset && t < n { e_w.get(t - offset).copied().unwrap_or(0.0) } else { 0.0 };

    let mut y = history.to_vec();
    for h in 0..horizon {
        let t = n + h;
        let mut v = constant;
        for (j, a) in big_ar.iter().enumerate() {
            if let Some(prev) = t.checked_sub(j + 1) {
                v += a * y[prev];
            }
        }
        for (j, b) in ma.iter().enumerate() {
            if let Some(prev) = t.checked_sub(j + 1) {
                v += b * innovation(prev);
            }
        }
        y.push(v);
    }
    let mean_path = y[n..].to_vec();

    let psi = psi_weights(&big_ar, &ma, horizon);
    let mut acc = 0.0;
    let mut lower = Vec::with_capacity(horizon);
    let mut upper = Vec::with_capacity(horizon);
    for (h, m) in mean_path.iter().enumerate() {
        acc += psi[h] * psi[h];
        let half = Z95 * (fit.sigma2 * acc).sqrt();
        lower.push(m - half);
        upper.push(m + half);
    }
    Ok(Forecast { horizon, mean: mean_path, lower95: lower, upper95: upper })
}

/// `values` as a percentage of the largest historical value.
pub fn normalize_to_peak(history: &[f64], values: &[f64]) -> Result<Vec<f64>> {
    if history.is_empty() {
        return Err(ForecastError::EmptyHistory);
    }
    let peak = history.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if peak.is_nan() || peak <= 0.0 {
        return Err(ForecastError::NonPositivePeak);
    }
    Ok(values.iter().map(|v| 100.0 * v / peak).collect())
}

//! Pairwise Granger causality between theme series and the resulting
//! directed network.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::forecast::select_d;
use crate::statcore::linalg::{lstsq, Design};
use crate::statcore::{difference, f_sf, StatError, DEFAULT_MAX_LAG};
use crate::themes::ThemeId;

pub const ALPHA: f64 = 0.05;
pub const VERY_STRONG_P: f64 = 0.001;
pub const MAX_LAG: usize = 4;
pub const MIN_DF: usize = 10;
/// Upper bound on the DOT pen width.
pub const MAX_PENWIDTH: f64 = 6.0;

#[derive(Debug, Error, PartialEq)]
pub enum CausalityError {
    #[error("series lengths differ ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("lag must be at least 1")]
    ZeroLag,
    #[error("series of length {len} leaves {df} residual degrees of freedom at lag {lag}; need {MIN_DF}")]
    TooShort { len: usize, lag: usize, df: i64 },
    #[error("no series for theme `{0}`")]
    MissingTheme(ThemeId),
    #[error("need at least two themes")]
    TooFewThemes,
    #[error(transparent)]
    Stat(#[from] StatError),
}

pub type Result<T> = std::result::Result<T, CausalityError>;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrangerTest {
    pub lag: usize,
    pub f_stat: f64,
    pub p_value: f64,
    pub df_num: usize,
    pub df_den: usize,
    pub ssr_restricted: f64,
    pub ssr_unrestricted: f64,
    /// The regressors were linearly dependent; `p_value` is set to 1.
    pub collinear: bool,
}

fn lagged_design(x: &[f64], y: &[f64], lag: usize, with_x: bool) -> (Design, Vec<f64>) {
    let n = y.len();
    let cols = 1 + lag + if with_x { lag } else { 0 };
    let mut design = Design::with_capacity(cols, n - lag);
    let mut resp = Vec::with_capacity(n - lag);
    let mut row = vec![0.0; cols];
    for t in lag..n {
        row[0] = 1.0;
        for j in 1..=lag {
            row[j] = y[t - j];
            if with_x {
                row[lag + j] = x[t - j];
            }
        }
        design.push_row(&row);
        resp.push(y[t]);
    }
    (design, resp)
}

/// F test of whether lags `1..=lag` of `x` improve an autoregression of
/// `y` on its own lags `1..=lag` (both with a constant).
pub fn granger_test(x: &[f64], y: &[f64], lag: usize) -> Result<GrangerTest> {
    if x.len() != y.len() {
        return Err(CausalityError::LengthMismatch(x.len(), y.len()));
    }
    if lag == 0 {
        return Err(CausalityError::ZeroLag);
    }
    let n_obs = y.len().saturating_sub(lag);
    let df = n_obs as i64 - 2 * lag as i64 - 1;
    if df < MIN_DF as i64 {
        return Err(CausalityError::TooShort { len: y.len(), lag, df });
    }
    let df_den = df as usize;
    let collinear = |ssr_r: f64, ssr_u: f64| GrangerTest {
        lag,
        f_stat: 0.0,
        p_value: 1.0,
        df_num: lag,
        df_den,
        ssr_restricted: ssr_r,
        ssr_unrestricted: ssr_u,
        collinear: true,
    };

    let (dr, yr) = lagged_design(x, y, lag, false);
    let restricted = match lstsq(&dr, &yr) {
        Ok(fit) => fit,
        Err(StatError::RankDeficient) => return Ok(collinear(f64::NAN, f64::NAN)),
        Err(e) => return Err(e.into()),
    };
    let (du, yu) = lagged_design(x, y, lag, true);
    let unrestricted = match lstsq(&du, &yu) {
        Ok(fit) => fit,
        Err(StatError::RankDeficient) => return Ok(collinear(restricted.ssr, f64::NAN)),
        Err(e) => return Err(e.into()),
    };

    let (ssr_r, ssr_u) = (restricted.ssr, unrestricted.ssr.min(restricted.ssr));
    let scale = yr.iter().map(|v| v * v).sum::<f64>().max(f64::MIN_POSITIVE);
    let (f_stat, p_value) = if ssr_u <= 1e-24 * scale {
        if ssr_r - ssr_u > 1e-24 * scale {
            (f64::INFINITY, 0.0)
        } else {
            (0.0, 1.0)
        }
    } else {
        let f = ((ssr_r - ssr_u) / lag as f64) / (ssr_u / df_den as f64);
        (f, f_sf(f, lag, df_den)?)
    };
    Ok(GrangerTest { lag, f_stat, p_value, df_num: lag, df_den, ssr_restricted: ssr_r, ssr_unrestricted: ssr_u, collinear: false })
}

/// p-value of `x` Granger-causing `y` at `lag`.
pub fn granger_p(x: &[f64], y: &[f64], lag: usize) -> Result<f64> {
    Ok(granger_test(x, y, lag)?.p_value)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strength {
    None,
    Weak,
    /// Part of the label set but never assigned: with only the minimum p and
    /// the significant-lag list it cannot be told apart from `Strong`.
    Moderate,
    Strong,
    VeryStrong,
}

impl Strength {
    pub fn as_str(self) -> &'static str {
        match self {
            Strength::None => "none",
            Strength::Weak => "weak",
            Strength::Moderate => "moderate",
            Strength::Strong => "strong",
            Strength::VeryStrong => "very_strong",
        }
    }
}

/// Label from the smallest p-value and the number of lags with `p < 0.05`.
pub fn classify_strength(min_p: f64, significant_lags: usize) -> Strength {
    match significant_lags {
        0 => Strength::None,
        1 => Strength::Weak,
        _ if min_p < VERY_STRONG_P => Strength::VeryStrong,
        _ => Strength::Strong,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CausalEdge {
    pub source: ThemeId,
    pub target: ThemeId,
    pub p_by_lag: BTreeMap<usize, f64>,
    pub significant_lags: Vec<usize>,
    pub min_p: f64,
    pub strength: Strength,
    /// Some lag hit the collinearity convention.
    pub collinear: bool,
    /// The reverse edge is also in the network.
    pub bidirectional: bool,
}

/// Tests `x -> y` at lags `1..=max_lag`.
pub fn classify_pair(source: ThemeId, target: ThemeId, x: &[f64], y: &[f64], max_lag: usize) -> Result<CausalEdge> {
    let mut p_by_lag = BTreeMap::new();
    let mut collinear = false;
    for lag in 1..=max_lag {
        let t = granger_test(x, y, lag)?;
        collinear |= t.collinear;
        p_by_lag.insert(lag, t.p_value);
    }
    let significant_lags: Vec<usize> = p_by_lag.iter().filter(|(_, &p)| p < ALPHA).map(|(&l, _)| l).collect();
    let min_p = p_by_lag.values().copied().fold(1.0, f64::min);
    Ok(CausalEdge {
        source,
        target,
        strength: classify_strength(min_p, significant_lags.len()),
        p_by_lag,
        significant_lags,
        min_p,
        collinear,
        bidirectional: false,
    })
}

/// Aligns two series on their common tail.
fn align<'a>(x: &'a [f64], y: &'a [f64]) -> (&'a [f64], &'a [f64]) {
    let n = x.len().min(y.len());
    (&x[x.len() - n..], &y[y.len() - n..])
}

pub fn classify_edge(source: ThemeId, target: ThemeId, series: &BTreeMap<ThemeId, Vec<f64>>) -> Result<CausalEdge> {
    let x = series.get(&source).ok_or(CausalityError::MissingTheme(source))?;
    let y = series.get(&target).ok_or(CausalityError::MissingTheme(target))?;
    let (x, y) = align(x, y);
    classify_pair(source, target, x, y, MAX_LAG)
}

/// Differences a series by the order that makes the ADF test reject.
pub fn stationarize(series: &[f64]) -> Result<(Vec<f64>, usize)> {
    let d = select_d(series, DEFAULT_MAX_LAG);
    Ok((difference(series, d)?, d))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CausalNetwork {
    pub nodes: Vec<ThemeId>,
    /// Edges with strength other than `none`, ordered by (source, target).
    pub edges: Vec<CausalEdge>,
}

impl CausalNetwork {
    pub fn from_edges(nodes: Vec<ThemeId>, tested: &[CausalEdge]) -> Self {
        let mut edges: Vec<CausalEdge> = tested.iter().filter(|e| e.strength != Strength::None).cloned().collect();
        edges.sort_by_key(|e| (e.source, e.target));
        let keys: Vec<(ThemeId, ThemeId)> = edges.iter().map(|e| (e.source, e.target)).collect();
        for e in &mut edges {
            e.bidirectional = keys.binary_search(&(e.target, e.source)).is_ok();
        }
        Self { nodes, edges }
    }
}

/// Every ordered pair of distinct themes, in (source, target) order.
pub fn test_all_pairs(themes: &[ThemeId], series: &BTreeMap<ThemeId, Vec<f64>>) -> Result<Vec<CausalEdge>> {
    if themes.len() < 2 {
        return Err(CausalityError::TooFewThemes);
    }
    let mut themes = themes.to_vec();
    themes.sort();
    themes.dedup();
    let pairs: Vec<(ThemeId, ThemeId)> =
        themes.iter().flat_map(|&a| themes.iter().filter(move |&&b| b != a).map(move |&b| (a, b))).collect();
    pairs.par_iter().map(|&(a, b)| classify_edge(a, b, series)).collect()
}

pub fn build_network(themes: &[ThemeId], series: &BTreeMap<ThemeId, Vec<f64>>) -> Result<CausalNetwork> {
    let tested = test_all_pairs(themes, series)?;
    let mut nodes = themes.to_vec();
    nodes.sort();
    nodes.dedup();
    Ok(CausalNetwork::from_edges(nodes, &tested))
}

fn penwidth(min_p: f64) -> f64 {
    (-min_p.max(1e-300).log10()).clamp(1.0, MAX_PENWIDTH)
}

/// Graphviz description of the network.
pub fn export_dot(network: &CausalNetwork) -> String {
    let mut out = String::from("digraph causality {\n    rankdir=LR;\n    node [shape=ellipse];\n");
    for n in &network.nodes {
        let _ = writeln!(out, "    \"{n}\";");
    }
    for e in &network.edges {
        let _ = writeln!(
            out,
            "    \"{}\" -> \"{}\" [label=\"{}\", penwidth={:.2}{}];",
            e.source,
            e.target,
            e.strength.as_str(),
            penwidth(e.min_p),
            if e.bidirectional { ", dir=forward, color=\"firebrick\"" } else { "" }
        );
    }
    out.push_str("}\n");
    out
}

/// `source,target,lag,p_value,significant` rows for every tested pair.
pub fn lag_table_csv(tested: &[CausalEdge]) -> String {
    let mut out = String::from("source,target,lag,p_value,significant\n");
    for e in tested {
        for (lag, p) in &e.p_by_lag {
            let _ = writeln!(out, "{},{},{},{:.6e},{}", e.source, e.target, lag, p, *p < ALPHA);
        }
    }
    out
}

//! Direction, significance and confidence labels for weekly theme counts.
//!
//! A theme's counts are regressed on the week index. The slope's sign and the
//! fit's R² give the direction; the slope p-value gives significance and
//! confidence.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::chronos::ThemeSeries;
use crate::statcore::{ols_line, StatError};
use crate::themes::ThemeId;

pub const ALPHA: f64 = 0.05;
pub const HIGH_CONFIDENCE_P: f64 = 0.005;
pub const STRONG_R2: f64 = 0.5;
pub const MODERATE_R2: f64 = 0.3;
pub const MIN_WEEKS: usize = 20;
/// Themes with fewer records than this lose one confidence level.
pub const DEFAULT_SPARSE_RECORDS: u64 = 300;

#[derive(Debug, Error, PartialEq)]
pub enum TrendError {
    #[error("series has {got} weeks, need at least {MIN_WEEKS}")]
    TooShort { got: usize },
    #[error(transparent)]
    Stat(#[from] StatError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    StronglyRising,
    ModeratelyRising,
    SlightlyRising,
    Stable,
    SlightlyFalling,
    ModeratelyFalling,
    StronglyFalling,
}

impl Direction {
    pub fn label(self) -> &'static str {
        match self {
            Direction::StronglyRising => "Strongly Rising",
            Direction::ModeratelyRising => "Moderately Rising",
            Direction::SlightlyRising => "Slightly Rising",
            Direction::Stable => "Stable",
            Direction::SlightlyFalling => "Slightly Falling",
            Direction::ModeratelyFalling => "Moderately Falling",
            Direction::StronglyFalling => "Strongly Falling",
        }
    }

    pub fn is_rising(self) -> bool {
        matches!(self, Direction::StronglyRising | Direction::ModeratelyRising | Direction::SlightlyRising)
    }

    pub fn is_falling(self) -> bool {
        matches!(self, Direction::StronglyFalling | Direction::ModeratelyFalling | Direction::SlightlyFalling)
    }

    /// Rising and falling swap; stable stays.
    pub fn mirrored(self) -> Self {
        match self {
            Direction::StronglyRising => Direction::StronglyFalling,
            Direction::ModeratelyRising => Direction::ModeratelyFalling,
            Direction::SlightlyRising => Direction::SlightlyFalling,
            Direction::Stable => Direction::Stable,
            Direction::SlightlyFalling => Direction::SlightlyRising,
            Direction::ModeratelyFalling => Direction::ModeratelyRising,
            Direction::StronglyFalling => Direction::StronglyRising,
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Confidence {
    Low,
    Medium,
    High,
}

impl Confidence {
    pub fn label(self) -> &'static str {
        match self {
            Confidence::Low => "Low",
            Confidence::Medium => "Medium",
            Confidence::High => "High",
        }
    }

    pub fn downgraded(self) -> Self {
        match self {
            Confidence::High => Confidence::Medium,
            _ => Confidence::Low,
        }
    }
}

impl fmt::Display for Confidence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrendReport {
    pub theme: ThemeId,
    /// Mentions per week.
    pub slope: f64,
    pub p_value: f64,
    pub r_squared: f64,
    pub direction: Direction,
    pub significant: bool,
    pub confidence: Confidence,
}

impl TrendReport {
    /// `"Slightly Rising, Significant, High"`.
    pub fn summary(&self) -> String {
        let sig = if self.significant { "Significant" } else { "Not Significant" };
        let dir = if self.direction == Direction::Stable { "Stable (No Clear Trend)" } else { self.direction.label() };
        format!("{dir}, {sig}, {}", self.confidence)
    }
}

/// Labels from the regression statistics alone.
pub fn label(slope: f64, p_value: f64, r_squared: f64) -> (Direction, bool, Confidence) {
    let significant = p_value < ALPHA;
    let direction = if !significant || slope == 0.0 {
        Direction::Stable
    } else {
        let rising = slope > 0.0;
        match (r_squared >= STRONG_R2, r_squared >= MODERATE_R2, rising) {
            (true, _, true) => Direction::StronglyRising,
            (true, _, false) => Direction::StronglyFalling,
            (false, true, true) => Direction::ModeratelyRising,
            (false, true, false) => Direction::ModeratelyFalling,
            (false, false, true) => Direction::SlightlyRising,
            (false, false, false) => Direction::SlightlyFalling,
        }
    };
    let confidence = if p_value < HIGH_CONFIDENCE_P {
        Confidence::High
    } else if significant {
        Confidence::Medium
    } else {
        Confidence::Low
    };
    (direction, significant, confidence)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrendOptions {
    /// Downgrade confidence one level for themes with fewer total records.
    pub sparse_records: Option<u64>,
}

impl Default for TrendOptions {
    fn default() -> Self {
        Self { sparse_records: Some(DEFAULT_SPARSE_RECORDS) }
    }
}

impl TrendOptions {
    pub fn without_sample_size() -> Self {
        Self { sparse_records: None }
    }
}

pub fn classify_trend(series: &ThemeSeries) -> Result<TrendReport, TrendError> {
    classify_trend_with(series, &TrendOptions::default())
}

pub fn classify_trend_with(series: &ThemeSeries, opts: &TrendOptions) -> Result<TrendReport, TrendError> {
    let n = series.counts.len();
    if n < MIN_WEEKS {
        return Err(TrendError::TooShort { got: n });
    }
    let x: Vec<f64> = (0..n).map(|i| i as f64).collect();
    let fit = ols_line(&x, &series.counts_f64())?;
    let (direction, significant, mut confidence) = label(fit.slope, fit.p_value, fit.r_squared);
    if opts.sparse_records.is_some_and(|min| series.total() < min) {
        confidence = confidence.downgraded();
    }
    Ok(TrendReport {
        theme: series.theme,
        slope: fit.slope,
        p_value: fit.p_value,
        r_squared: fit.r_squared,
        direction,
        significant,
        confidence,
    })
}

/// Fixed-width table, one row per theme.
pub fn format_table(reports: &[TrendReport]) -> String {
    let mut out =
        format!("{:<15} {:<18} {:<16} {:<7} {:>9} {:>6} {:>8}\n", "theme", "direction", "significance", "conf", "slope", "R2", "p");
    for r in reports {
        out.push_str(&format!(
            "{:<15} {:<18} {:<16} {:<7} {:>9.4} {:>6.3} {:>8.4}\n",
            r.theme.as_str(),
            r.direction.label(),
            if r.significant { "significant" } else { "not significant" },
            r.confidence.label(),
            r.slope,
            r.r_squared,
            r.p_value
        ));
    }
    out
}

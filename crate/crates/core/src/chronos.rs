//! Synthetic weekly calendar, per-theme weekly series and classical additive
//! decomposition.
//!
//! The calendar spans the 104 ISO-8601 weeks 2022-W01 (Monday 2022-01-03)
//! through 2023-W52 (Sunday 2023-12-31). Both years have 52 ISO weeks, so
//! week `i` starts on 2022-01-03 + 7i days.

use std::fmt;

use chrono::{Datelike, Duration, NaiveDate};
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ingest::MergedRecord;
use crate::seeds;
use crate::sentiment::Rubric;
use crate::themes::ThemeId;

pub const N_WEEKS: usize = 104;
/// Quarterly fashion cycle, in weeks.
pub const DEFAULT_PERIOD: usize = 13;

/// Committed copy of the week table; a test keeps it in sync with the code.
pub const CALENDAR_TABLE: &str = include_str!("../config/calendar.csv");

pub const FASHION_WEEK_WEIGHT: f64 = 1.8;
pub const HOLIDAY_WEIGHT: f64 = 1.5;

#[derive(Debug, Error)]
pub enum ChronosError {
    #[error("week index {0} outside 0..{N_WEEKS}")]
    WeekOutOfRange(usize),
    #[error("calendar weights must be {N_WEEKS} finite positive values")]
    InvalidWeights,
    #[error("series of length {len} is shorter than two periods ({period})")]
    TooShort { len: usize, period: usize },
    #[error("period must be at least 2")]
    BadPeriod,
    #[error("record `{0}` has no week assigned")]
    MissingWeek(String),
}

pub type Result<T> = std::result::Result<T, ChronosError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "usize", into = "usize")]
pub struct WeekIndex(u8);

impl TryFrom<usize> for WeekIndex {
    type Error = ChronosError;

    fn try_from(i: usize) -> Result<Self> {
        WeekIndex::new(i)
    }
}

impl From<WeekIndex> for usize {
    fn from(w: WeekIndex) -> usize {
        w.0 as usize
    }
}

impl fmt::Display for WeekIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

fn calendar_origin() -> NaiveDate {
    NaiveDate::from_ymd_opt(2022, 1, 3).expect("valid date")
}

impl WeekIndex {
    pub fn new(i: usize) -> Result<Self> {
        if i < N_WEEKS {
            Ok(WeekIndex(i as u8))
        } else {
            Err(ChronosError::WeekOutOfRange(i))
        }
    }

    pub fn get(self) -> usize {
        self.0 as usize
    }

    pub fn all() -> impl Iterator<Item = WeekIndex> {
        (0..N_WEEKS).map(|i| WeekIndex(i as u8))
    }

    /// Monday of the week.
    pub fn start(self) -> NaiveDate {
        calendar_origin() + Duration::days(7 * i64::from(self.0))
    }

    /// Thursday of the week; ISO weeks belong to the month and year of their
    /// Thursday.
    pub fn thursday(self) -> NaiveDate {
        self.start() + Duration::days(3)
    }

    /// `(iso_year, iso_week)`.
    pub fn iso(self) -> (i32, u32) {
        let w = self.start().iso_week();
        (w.year(), w.week())
    }

    pub fn containing(date: NaiveDate) -> Option<WeekIndex> {
        let days = (date - calendar_origin()).num_days();
        if days < 0 {
            return None;
        }
        let i = (days / 7) as usize;
        WeekIndex::new(i).ok()
    }
}

/// Renders the week table (`index,iso_year,iso_week,monday,thursday`).
pub fn calendar_csv() -> String {
    let mut s = String::from("index,iso_year,iso_week,monday,thursday\n");
    for w in WeekIndex::all() {
        let (y, n) = w.iso();
        s.push_str(&format!("{},{},{},{},{}\n", w, y, n, w.start(), w.thursday()));
    }
    s
}

/// Sampling weight per calendar week.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalendarWeights(Vec<f64>);

impl CalendarWeights {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.len() != N_WEEKS || weights.iter().any(|w| !w.is_finite() || *w <= 0.0) {
            return Err(ChronosError::InvalidWeights);
        }
        Ok(Self(weights))
    }

    pub fn uniform() -> Self {
        Self(vec![1.0; N_WEEKS])
    }

    pub fn get(&self, w: WeekIndex) -> f64 {
        self.0[w.get()]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

/// Base weight 1.0, raised during fashion-week months (Feb, Mar, Sep, Oct)
/// and the holiday stretch from the last week of November through December.
/// A week's month is the month of its Thursday.
pub fn default_fashion_weights() -> CalendarWeights {
    let w = WeekIndex::all()
        .map(|wk| {
            let th = wk.thursday();
            match th.month() {
                2 | 3 | 9 | 10 => FASHION_WEEK_WEIGHT,
                12 => HOLIDAY_WEIGHT,
                11 if th.day() >= 24 => HOLIDAY_WEIGHT,
                _ => 1.0,
            }
        })
        .collect();
    CalendarWeights(w)
}

/// Draws each record's week independently from the categorical distribution
/// proportional to `weights`. Same seed and record order give the same draw.
pub fn assign_synthetic_timestamps(records: &mut [MergedRecord], weights: &CalendarWeights, seed: u64) {
    let dist = WeightedIndex::new(weights.as_slice()).expect("weights validated at construction");
    let mut rng = seeds::rng(seed);
    for r in records.iter_mut() {
        r.week = Some(WeekIndex(dist.sample(&mut rng) as u8));
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThemeSeries {
    pub theme: ThemeId,
    pub counts: Vec<u32>,
    /// Mean score of the week's records; `None` for weeks without records.
    pub mean_sentiment: Vec<Option<f64>>,
}

impl ThemeSeries {
    pub fn counts_f64(&self) -> Vec<f64> {
        self.counts.iter().map(|&c| f64::from(c)).collect()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().map(|&c| u64::from(c)).sum()
    }
}

/// Weekly mention counts and mean `rubric` score for one theme.
pub fn build_weekly_series(records: &[MergedRecord], theme: ThemeId, rubric: Rubric) -> Result<ThemeSeries> {
    let mut counts = vec![0u32; N_WEEKS];
    let mut sums = vec![0.0f64; N_WEEKS];
    for r in records.iter().filter(|r| r.themes.contains(&theme)) {
        let w = r.week.ok_or_else(|| ChronosError::MissingWeek(r.id.clone()))?.get();
        counts[w] += 1;
        sums[w] += rubric.score(&r.sentiment);
    }
    let mean_sentiment = counts.iter().zip(&sums).map(|(&c, &s)| (c > 0).then(|| s / f64::from(c))).collect();
    Ok(ThemeSeries { theme, counts, mean_sentiment })
}

/// Additive split `Y = T + S + R`. Trend and residual are `None` where the
/// centered moving average is undefined (the first and last `period / 2`
/// points).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Decomposition {
    pub observed: Vec<f64>,
    pub trend: Vec<Option<f64>>,
    pub seasonal: Vec<f64>,
    pub residual: Vec<Option<f64>>,
    pub period: usize,
}

/// Centered moving average. Odd periods use a plain window of `period`
/// points; even periods use the 2x`period` filter with half weights at both
/// ends.
pub fn centered_moving_average(values: &[f64], period: usize) -> Vec<Option<f64>> {
    let n = values.len();
    let half = period / 2;
    let mut out = vec![None; n];
    if n < 2 * half + 1 {
        return out;
    }
    for (t, slot) in out.iter_mut().enumerate().take(n - half).skip(half) {
        let v = if period % 2 == 1 {
            values[t - half..=t + half].iter().sum::<f64>() / period as f64
        } else {
            let inner: f64 = values[t - half + 1..t + half].iter().sum();
            (inner + 0.5 * (values[t - half] + values[t + half])) / period as f64
        };
        *slot = Some(v);
    }
    out
}

pub fn decompose_additive(values: &[f64], period: usize) -> Result<Decomposition> {
    if period < 2 {
        return Err(ChronosError::BadPeriod);
    }
    if values.len() < 2 * period {
        return Err(ChronosError::TooShort { len: values.len(), period });
    }
    let trend = centered_moving_average(values, period);

    let mut sums = vec![0.0; period];
    let mut counts = vec![0usize; period];
    for (t, (y, tr)) in values.iter().zip(&trend).enumerate() {
        if let Some(tr) = tr {
            sums[t % period] += y - tr;
            counts[t % period] += 1;
        }
    }
    let mut pattern: Vec<f64> = sums.iter().zip(&counts).map(|(s, &c)| s / c as f64).collect();
    let level = pattern.iter().sum::<f64>() / period as f64;
    for p in &mut pattern {
        *p -= level;
    }

    let seasonal: Vec<f64> = (0..values.len()).map(|t| pattern[t % period]).collect();
    let residual = values.iter().zip(&trend).zip(&seasonal).map(|((y, tr), s)| tr.map(|tr| y - tr - s)).collect();
    Ok(Decomposition { observed: values.to_vec(), trend, seasonal, residual, period })
}

//! Compound sentiment scores and five-class rubrics.
//!
//! Two scores are derived from a `(pos, neg, neu)` triple:
//!
//! - the ratio compound `(pos - neg) / (pos + neg + 0.001)`
//! - the improved compound `tanh(2 (pos - neg)) * (1 - 0.7 neu)`, which
//!   squashes extreme values and shrinks the score when the text is mostly
//!   neutral
//!
//! Each has its own category thresholds. Both rubrics share the
//! `very_positive >= 0.5` and `very_negative <= -0.5` cut points; the neutral
//! band is `(-0.05, 0.05)` for the ratio compound and `(-0.15, 0.15)` for the
//! improved one.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ingest::SentimentTriple;

#[derive(Debug, Error)]
pub enum SentimentError {
    #[error("cannot summarize an empty record list")]
    Empty,
    #[error("unknown rubric `{0}` (expected original or improved)")]
    UnknownRubric(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SentimentCategory {
    VeryNegative,
    Negative,
    Neutral,
    Positive,
    VeryPositive,
}

impl SentimentCategory {
    pub const ALL: [SentimentCategory; 5] = [
        SentimentCategory::VeryNegative,
        SentimentCategory::Negative,
        SentimentCategory::Neutral,
        SentimentCategory::Positive,
        SentimentCategory::VeryPositive,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SentimentCategory::VeryNegative => "very_negative",
            SentimentCategory::Negative => "negative",
            SentimentCategory::Neutral => "neutral",
            SentimentCategory::Positive => "positive",
            SentimentCategory::VeryPositive => "very_positive",
        }
    }

    /// Order-preserving collapse onto three classes.
    pub fn polarity(self) -> Polarity {
        match self {
            SentimentCategory::VeryNegative | SentimentCategory::Negative => Polarity::Negative,
            SentimentCategory::Neutral => Polarity::Neutral,
            SentimentCategory::Positive | SentimentCategory::VeryPositive => Polarity::Positive,
        }
    }
}

impl fmt::Display for SentimentCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Three-class label used by the classifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Polarity {
    Negative,
    Neutral,
    Positive,
}

impl Polarity {
    pub const ALL: [Polarity; 3] = [Polarity::Negative, Polarity::Neutral, Polarity::Positive];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Polarity::Negative => "negative",
            Polarity::Neutral => "neutral",
            Polarity::Positive => "positive",
        }
    }
}

impl fmt::Display for Polarity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Which compound score (and matching thresholds) to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Rubric {
    Original,
    #[default]
    Improved,
}

impl Rubric {
    pub fn score(self, t: &SentimentTriple) -> f64 {
        match self {
            Rubric::Original => compound(t.pos, t.neg),
            Rubric::Improved => improved_compound(t.pos, t.neg, t.neu),
        }
    }

    pub fn categorize(self, score: f64) -> SentimentCategory {
        match self {
            Rubric::Original => categorize_original(score),
            Rubric::Improved => categorize_improved(score),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Rubric::Original => "original",
            Rubric::Improved => "improved",
        }
    }
}

impl FromStr for Rubric {
    type Err = SentimentError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_lowercase().as_str() {
            "original" => Ok(Rubric::Original),
            "improved" => Ok(Rubric::Improved),
            other => Err(SentimentError::UnknownRubric(other.to_string())),
        }
    }
}

impl fmt::Display for Rubric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

pub fn compound(pos: f64, neg: f64) -> f64 {
    (pos - neg) / (pos + neg + 0.001)
}

pub fn improved_compound(pos: f64, neg: f64, neu: f64) -> f64 {
    (2.0 * (pos - neg)).tanh() * (1.0 - neu * 0.7)
}

fn five_class(c: f64, band: f64) -> SentimentCategory {
    if c >= 0.5 {
        SentimentCategory::VeryPositive
    } else if c >= band {
        SentimentCategory::Positive
    } else if c > -band {
        SentimentCategory::Neutral
    } else if c > -0.5 {
        SentimentCategory::Negative
    } else {
        SentimentCategory::VeryNegative
    }
}

pub fn categorize_original(c: f64) -> SentimentCategory {
    five_class(c, 0.05)
}

pub fn categorize_improved(c: f64) -> SentimentCategory {
    five_class(c, 0.15)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CompoundScores {
    pub compound: f64,
    pub improved: f64,
    pub category_original: SentimentCategory,
    pub category_improved: SentimentCategory,
}

impl CompoundScores {
    pub fn from_triple(t: &SentimentTriple) -> Self {
        let compound = compound(t.pos, t.neg);
        let improved = improved_compound(t.pos, t.neg, t.neu);
        Self { compound, improved, category_original: categorize_original(compound), category_improved: categorize_improved(improved) }
    }

    pub fn category(&self, rubric: Rubric) -> SentimentCategory {
        match rubric {
            Rubric::Original => self.category_original,
            Rubric::Improved => self.category_improved,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Distribution {
    pub rubric: Rubric,
    pub n: usize,
    pub five_class: BTreeMap<SentimentCategory, f64>,
    pub three_class: BTreeMap<Polarity, f64>,
}

/// Category fractions; every category appears, zeros included.
pub fn distribution<'a, I>(triples: I, rubric: Rubric) -> Result<Distribution, SentimentError>
where
    I: IntoIterator<Item = &'a SentimentTriple>,
{
    distribution_of_categories(triples.into_iter().map(|t| rubric.categorize(rubric.score(t))), rubric)
}

pub fn distribution_of_categories<I>(categories: I, rubric: Rubric) -> Result<Distribution, SentimentError>
where
    I: IntoIterator<Item = SentimentCategory>,
{
    let mut counts: BTreeMap<SentimentCategory, usize> = SentimentCategory::ALL.iter().map(|&c| (c, 0)).collect();
    let mut n = 0usize;
    for c in categories {
        *counts.get_mut(&c).expect("all categories seeded") += 1;
        n += 1;
    }
    if n == 0 {
        return Err(SentimentError::Empty);
    }
    let mut three: BTreeMap<Polarity, usize> = Polarity::ALL.iter().map(|&p| (p, 0)).collect();
    for (&c, &k) in &counts {
        *three.get_mut(&c.polarity()).expect("seeded") += k;
    }
    let frac = |k: usize| k as f64 / n as f64;
    Ok(Distribution {
        rubric,
        n,
        five_class: counts.into_iter().map(|(c, k)| (c, frac(k))).collect(),
        three_class: three.into_iter().map(|(p, k)| (p, frac(k))).collect(),
    })
}

//! Corpus ingestion: the text table and the sentiment-score table are loaded
//! from CSV, inner-joined on tweet id, cleaned, and filtered down to
//! fashion-related records.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fs::File;
use std::io::Read;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::chronos::WeekIndex;
use crate::themes::ThemeId;

/// Keyword list shipped with the crate (one term per line).
pub const DEFAULT_KEYWORDS: &str = include_str!("../config/keywords.txt");

/// Lower bound of the tolerated `pos + neg + neu` sum.
pub const SIMPLEX_MIN: f64 = 0.99;
/// Upper bound of the tolerated `pos + neg + neu` sum.
pub const SIMPLEX_MAX: f64 = 1.01;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("input file not found: {}", .0.display())]
    NotFound(PathBuf),
    #[error("cannot read {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed CSV: {0}")]
    Csv(#[from] csv::Error),
    #[error("missing required column `{0}`")]
    MissingColumn(String),
    #[error("duplicate id `{0}`")]
    DuplicateId(String),
    #[error("empty id on data row {0}")]
    EmptyId(usize),
    #[error("row `{id}`: column {column} value `{value}` is not a number")]
    Parse { id: String, column: &'static str, value: String },
    #[error("row `{id}`: {column} = {value} is outside [0, 1]")]
    OutOfRange { id: String, column: &'static str, value: f64 },
    #[error("row `{id}`: pos + neg + neu = {sum} is outside [{SIMPLEX_MIN}, {SIMPLEX_MAX}]")]
    Simplex { id: String, sum: f64 },
    #[error("keyword set is empty")]
    EmptyKeywords,
}

pub type Result<T> = std::result::Result<T, IngestError>;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawText {
    pub id: String,
    pub text: String,
}

/// Pre-computed class probabilities for one text.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SentimentTriple {
    pub pos: f64,
    pub neg: f64,
    pub neu: f64,
}

impl SentimentTriple {
    /// Validates ranges and the tolerant simplex constraint.
    pub fn new(id: &str, pos: f64, neg: f64, neu: f64) -> Result<Self> {
        for (column, value) in [("POS", pos), ("NEG", neg), ("NEU", neu)] {
            if !(0.0..=1.0).contains(&value) {
                return Err(IngestError::OutOfRange { id: id.to_string(), column, value });
            }
        }
        let sum = pos + neg + neu;
        if !(SIMPLEX_MIN..=SIMPLEX_MAX).contains(&sum) {
            return Err(IngestError::Simplex { id: id.to_string(), sum });
        }
        Ok(Self { pos, neg, neu })
    }
}

/// One joined, cleaned record. `themes` is filled by [`crate::themes`] and
/// `week` by [`crate::chronos`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MergedRecord {
    pub id: String,
    pub raw_text: String,
    pub clean_text: String,
    pub hashtags: Vec<String>,
    pub sentiment: SentimentTriple,
    pub themes: BTreeSet<ThemeId>,
    pub week: Option<WeekIndex>,
}

impl MergedRecord {
    pub fn new(id: impl Into<String>, raw_text: impl Into<String>, sentiment: SentimentTriple) -> Self {
        let raw_text = raw_text.into();
        Self {
            id: id.into(),
            clean_text: clean_text(&raw_text),
            hashtags: extract_hashtags(&raw_text),
            raw_text,
            sentiment,
            themes: BTreeSet::new(),
            week: None,
        }
    }
}

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|source| {
        if source.kind() == std::io::ErrorKind::NotFound {
            IngestError::NotFound(path.to_path_buf())
        } else {
            IngestError::Io { path: path.to_path_buf(), source }
        }
    })
}

fn column(headers: &csv::StringRecord, name: &str) -> Result<usize> {
    headers.iter().position(|h| h.trim() == name).ok_or_else(|| IngestError::MissingColumn(name.to_string()))
}

pub fn load_text_corpus(path: &Path) -> Result<Vec<RawText>> {
    read_text_corpus(open(path)?)
}

/// Reads an `id,text` table; row order is preserved.
pub fn read_text_corpus<R: Read>(reader: R) -> Result<Vec<RawText>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let headers = rdr.headers()?.clone();
    let id_col = column(&headers, "id")?;
    let text_col = column(&headers, "text")?;
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for (row, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let id = rec.get(id_col).unwrap_or("").trim().to_string();
        if id.is_empty() {
            return Err(IngestError::EmptyId(row + 1));
        }
        if !seen.insert(id.clone()) {
            return Err(IngestError::DuplicateId(id));
        }
        out.push(RawText { id, text: rec.get(text_col).unwrap_or("").to_string() });
    }
    Ok(out)
}

pub fn load_t4sa(path: &Path) -> Result<HashMap<String, SentimentTriple>> {
    read_t4sa(open(path)?)
}

/// Reads a `TWID,NEG,NEU,POS` table (column order is free).
pub fn read_t4sa<R: Read>(reader: R) -> Result<HashMap<String, SentimentTriple>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let headers = rdr.headers()?.clone();
    let id_col = column(&headers, "TWID")?;
    let neg_col = column(&headers, "NEG")?;
    let neu_col = column(&headers, "NEU")?;
    let pos_col = column(&headers, "POS")?;
    let mut out = HashMap::new();
    for (row, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let id = rec.get(id_col).unwrap_or("").trim().to_string();
        if id.is_empty() {
            return Err(IngestError::EmptyId(row + 1));
        }
        let field = |col: usize, column: &'static str| -> Result<f64> {
            let raw = rec.get(col).unwrap_or("").trim();
            raw.parse::<f64>().map_err(|_| IngestError::Parse { id: id.clone(), column, value: raw.to_string() })
        };
        let neg = field(neg_col, "NEG")?;
        let neu = field(neu_col, "NEU")?;
        let pos = field(pos_col, "POS")?;
        let triple = SentimentTriple::new(&id, pos, neg, neu)?;
        if out.insert(id.clone(), triple).is_some() {
            return Err(IngestError::DuplicateId(id));
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct JoinStats {
    pub texts: usize,
    pub scores: usize,
    pub kept: usize,
    pub dropped_texts: usize,
    pub dropped_scores: usize,
}

/// Inner join on id. Output follows the order of `texts`.
pub fn merge_by_id(texts: &[RawText], scores: &HashMap<String, SentimentTriple>) -> (Vec<MergedRecord>, JoinStats) {
    let merged: Vec<MergedRecord> =
        texts.iter().filter_map(|t| scores.get(&t.id).map(|s| MergedRecord::new(t.id.clone(), t.text.clone(), *s))).collect();
    let kept = merged.len();
    let stats = JoinStats {
        texts: texts.len(),
        scores: scores.len(),
        kept,
        dropped_texts: texts.len() - kept,
        dropped_scores: scores.len() - kept,
    };
    (merged, stats)
}

fn is_url(token: &str) -> bool {
    token.starts_with("http://") || token.starts_with("https://") || token.starts_with("www.")
}

/// Lowercases, drops URL and `@`-mention tokens, keeps only `[a-z0-9 #]`,
/// and collapses whitespace.
pub fn clean_text(raw: &str) -> String {
    let lower = raw.to_lowercase();
    let mut out = String::with_capacity(lower.len());
    for token in lower.split_whitespace() {
        if is_url(token) || token.starts_with('@') {
            continue;
        }
        let kept: String = token.chars().filter(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || *c == '#').collect();
        if kept.is_empty() {
            continue;
        }
        if !out.is_empty() {
            out.push(' ');
        }
        out.push_str(&kept);
    }
    out
}

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_'
}

/// Lowercased tags following each `#`, deduplicated per text in order of
/// first appearance.
pub fn extract_hashtags(raw: &str) -> Vec<String> {
    let mut tags: Vec<String> = Vec::new();
    let mut chars = raw.char_indices().peekable();
    while let Some((i, c)) = chars.next() {
        if c != '#' {
            continue;
        }
        let start = i + c.len_utf8();
        let mut end = start;
        while let Some(&(j, d)) = chars.peek() {
            if !is_word_char(d) {
                break;
            }
            end = j + d.len_utf8();
            chars.next();
        }
        if end > start {
            let tag = raw[start..end].to_lowercase();
            if !tags.contains(&tag) {
                tags.push(tag);
            }
        }
    }
    tags
}

/// Word tokens of a cleaned text: whitespace- and `#`-separated.
pub fn word_tokens(clean: &str) -> impl Iterator<Item = &str> {
    clean.split(|c: char| c.is_whitespace() || c == '#').filter(|t| !t.is_empty())
}

/// Whole-word phrase matcher shared by fashion filtering, theme tagging and
/// brand attribution. Phrases are normalized with [`clean_text`], so
/// `"H&M"` matches the cleaned token `hm`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PhraseMatcher {
    phrases: Vec<Vec<String>>,
}

impl PhraseMatcher {
    pub fn new<I, S>(phrases: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut phrases: Vec<Vec<String>> = phrases
            .into_iter()
            .map(|p| word_tokens(&clean_text(p.as_ref())).map(str::to_string).collect::<Vec<_>>())
            .filter(|p: &Vec<String>| !p.is_empty())
            .collect();
        phrases.sort();
        phrases.dedup();
        Self { phrases }
    }

    pub fn is_empty(&self) -> bool {
        self.phrases.is_empty()
    }

    pub fn matches_tokens(&self, tokens: &[&str]) -> bool {
        self.phrases.iter().any(|p| tokens.windows(p.len()).any(|w| w.iter().zip(p).all(|(a, b)| *a == b.as_str())))
    }

    pub fn matches(&self, clean: &str) -> bool {
        let tokens: Vec<&str> = word_tokens(clean).collect();
        self.matches_tokens(&tokens)
    }

    /// Single-word phrases occurring as a substring of any tag.
    pub fn matches_hashtag_substring(&self, hashtags: &[String]) -> bool {
        self.phrases.iter().filter(|p| p.len() == 1).any(|p| hashtags.iter().any(|t| t.contains(p[0].as_str())))
    }
}

/// Parses a one-term-per-line keyword list. Blank lines and lines starting
/// with `#` are skipped.
pub fn parse_keywords(text: &str) -> BTreeSet<String> {
    text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')).map(str::to_lowercase).collect()
}

pub fn load_keywords(path: &Path) -> Result<BTreeSet<String>> {
    let mut s = String::new();
    open(path)?.read_to_string(&mut s).map_err(|source| IngestError::Io { path: path.to_path_buf(), source })?;
    Ok(parse_keywords(&s))
}

pub fn default_keywords() -> BTreeSet<String> {
    parse_keywords(DEFAULT_KEYWORDS)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FilterStats {
    pub total: usize,
    pub kept: usize,
    pub fraction: f64,
}

/// Keeps records whose cleaned text contains a keyword as a whole word (or,
/// with `hashtag_substring`, whose tags contain it as a substring).
pub fn filter_fashion(
    records: Vec<MergedRecord>,
    keywords: &BTreeSet<String>,
    hashtag_substring: bool,
) -> Result<(Vec<MergedRecord>, FilterStats)> {
    let matcher = PhraseMatcher::new(keywords);
    if matcher.is_empty() {
        return Err(IngestError::EmptyKeywords);
    }
    let total = records.len();
    let kept: Vec<MergedRecord> = records
        .into_iter()
        .filter(|r| matcher.matches(&r.clean_text) || (hashtag_substring && matcher.matches_hashtag_substring(&r.hashtags)))
        .collect();
    let stats = FilterStats { total, kept: kept.len(), fraction: if total == 0 { 0.0 } else { kept.len() as f64 / total as f64 } };
    Ok((kept, stats))
}

//! Theme tagging and hashtag statistics.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ingest::{word_tokens, MergedRecord, PhraseMatcher};
use crate::sentiment::Rubric;

/// Taxonomy shipped with the crate.
pub const DEFAULT_TAXONOMY: &str = include_str!("../config/taxonomy.txt");

#[derive(Debug, Error)]
pub enum ThemesError {
    #[error("unknown theme `{0}`")]
    UnknownTheme(String),
    #[error("taxonomy line {line}: {message}")]
    Taxonomy { line: usize, message: String },
    #[error("theme `{0}` has no keywords")]
    EmptyTheme(ThemeId),
    #[error("top_k must be at least 1")]
    ZeroTopK,
    #[error("min_count must be at least 1")]
    ZeroMinCount,
    #[error("cannot read taxonomy {}: {source}", path.display())]
    Io {
        path: std::path::PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, ThemesError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ThemeId {
    Vintage,
    Luxury,
    Accessories,
    Seasonal,
    Sustainability,
    Streetwear,
    Minimalist,
}

impl ThemeId {
    pub const ALL: [ThemeId; 7] = [
        ThemeId::Vintage,
        ThemeId::Luxury,
        ThemeId::Accessories,
        ThemeId::Seasonal,
        ThemeId::Sustainability,
        ThemeId::Streetwear,
        ThemeId::Minimalist,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ThemeId::Vintage => "vintage",
            ThemeId::Luxury => "luxury",
            ThemeId::Accessories => "accessories",
            ThemeId::Seasonal => "seasonal",
            ThemeId::Sustainability => "sustainability",
            ThemeId::Streetwear => "streetwear",
            ThemeId::Minimalist => "minimalist",
        }
    }
}

impl fmt::Display for ThemeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ThemeId {
    type Err = ThemesError;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_lowercase();
        ThemeId::ALL.into_iter().find(|t| t.as_str() == s).ok_or(ThemesError::UnknownTheme(s))
    }
}

/// Keyword sets per theme. Themes absent from the map are never tagged.
#[derive(Debug, Clone)]
pub struct ThemeTaxonomy {
    keywords: BTreeMap<ThemeId, BTreeSet<String>>,
    matchers: BTreeMap<ThemeId, PhraseMatcher>,
}

impl ThemeTaxonomy {
    pub fn new(keywords: BTreeMap<ThemeId, BTreeSet<String>>) -> Result<Self> {
        let mut matchers = BTreeMap::new();
        for (&theme, kws) in &keywords {
            let m = PhraseMatcher::new(kws);
            if m.is_empty() {
                return Err(ThemesError::EmptyTheme(theme));
            }
            matchers.insert(theme, m);
        }
        Ok(Self { keywords, matchers })
    }

    /// Parses `theme: kw1, kw2, ...` lines; `#` starts a comment line.
    pub fn parse(text: &str) -> Result<Self> {
        let mut keywords: BTreeMap<ThemeId, BTreeSet<String>> = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (theme, rest) =
                line.split_once(':').ok_or_else(|| ThemesError::Taxonomy { line: i + 1, message: "expected `theme: keywords`".into() })?;
            let theme: ThemeId = theme.parse()?;
            keywords.entry(theme).or_default().extend(rest.split(',').map(|k| k.trim().to_lowercase()).filter(|k| !k.is_empty()));
        }
        Self::new(keywords)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| ThemesError::Io { path: path.to_path_buf(), source })?;
        Self::parse(&text)
    }

    pub fn keywords(&self) -> &BTreeMap<ThemeId, BTreeSet<String>> {
        &self.keywords
    }

    /// Themes whose keywords occur as whole words in `clean_text`.
    pub fn tag(&self, clean_text: &str) -> BTreeSet<ThemeId> {
        let tokens: Vec<&str> = word_tokens(clean_text).collect();
        self.matchers.iter().filter(|(_, m)| m.matches_tokens(&tokens)).map(|(&t, _)| t).collect()
    }
}

impl Default for ThemeTaxonomy {
    fn default() -> Self {
        Self::parse(DEFAULT_TAXONOMY).expect("bundled taxonomy is valid")
    }
}

pub fn tag_themes(record: &MergedRecord, taxonomy: &ThemeTaxonomy) -> BTreeSet<ThemeId> {
    taxonomy.tag(&record.clean_text)
}

/// Tags every record in place.
pub fn tag_all(records: &mut [MergedRecord], taxonomy: &ThemeTaxonomy) {
    records.par_iter_mut().for_each(|r| r.themes = taxonomy.tag(&r.clean_text));
}

/// Records per theme; all seven themes are present in the result.
pub fn theme_counts(records: &[MergedRecord]) -> BTreeMap<ThemeId, usize> {
    let mut counts: BTreeMap<ThemeId, usize> = ThemeId::ALL.iter().map(|&t| (t, 0)).collect();
    for r in records {
        for t in &r.themes {
            *counts.entry(*t).or_default() += 1;
        }
    }
    counts
}

fn distinct_tags(r: &MergedRecord) -> BTreeSet<&str> {
    r.hashtags.iter().map(String::as_str).collect()
}

fn rank_desc<K: Ord + Clone>(counts: HashMap<K, usize>, top_k: usize) -> Vec<(K, usize)> {
    let mut v: Vec<(K, usize)> = counts.into_iter().collect();
    v.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    v.truncate(top_k);
    v
}

/// Tag counts (one per record per distinct tag), descending, ties ascending
/// by tag.
pub fn hashtag_frequency(records: &[MergedRecord], top_k: usize) -> Result<Vec<(String, usize)>> {
    if top_k == 0 {
        return Err(ThemesError::ZeroTopK);
    }
    let mut counts: HashMap<String, usize> = HashMap::new();
    for r in records {
        for t in distinct_tags(r) {
            *counts.entry(t.to_string()).or_default() += 1;
        }
    }
    Ok(rank_desc(counts, top_k))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CooccurrencePair {
    pub tag_a: String,
    pub tag_b: String,
    pub count: usize,
}

/// Unordered distinct-tag pairs per record, aggregated and ranked.
pub fn cooccurrence_pairs(records: &[MergedRecord], top_k: usize) -> Result<Vec<CooccurrencePair>> {
    if top_k == 0 {
        return Err(ThemesError::ZeroTopK);
    }
    let mut counts: HashMap<(String, String), usize> = HashMap::new();
    for r in records {
        let tags: Vec<&str> = distinct_tags(r).into_iter().collect();
        for i in 0..tags.len() {
            for j in (i + 1)..tags.len() {
                *counts.entry((tags[i].to_string(), tags[j].to_string())).or_default() += 1;
            }
        }
    }
    Ok(rank_desc(counts, top_k).into_iter().map(|((tag_a, tag_b), count)| CooccurrencePair { tag_a, tag_b, count }).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TagScore {
    pub tag: String,
    pub mean: f64,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SentimentRanking {
    pub most_positive: Vec<TagScore>,
    pub most_negative: Vec<TagScore>,
}

/// Mean score per tag over tags seen in at least `min_count` records.
pub fn hashtag_sentiment_ranking(
    records: &[MergedRecord],
    min_count: usize,
    score_field: Rubric,
    top_k: usize,
) -> Result<SentimentRanking> {
    if min_count == 0 {
        return Err(ThemesError::ZeroMinCount);
    }
    if top_k == 0 {
        return Err(ThemesError::ZeroTopK);
    }
    let mut acc: BTreeMap<&str, (f64, usize)> = BTreeMap::new();
    for r in records {
        let s = score_field.score(&r.sentiment);
        for t in distinct_tags(r) {
            let e = acc.entry(t).or_default();
            e.0 += s;
            e.1 += 1;
        }
    }
    let scores: Vec<TagScore> = acc
        .into_iter()
        .filter(|(_, (_, n))| *n >= min_count)
        .map(|(tag, (sum, n))| TagScore { tag: tag.to_string(), mean: sum / n as f64, count: n })
        .collect();
    let mut pos = scores.clone();
    pos.sort_by(|a, b| b.mean.total_cmp(&a.mean).then_with(|| a.tag.cmp(&b.tag)));
    pos.truncate(top_k);
    let mut neg = scores;
    neg.sort_by(|a, b| a.mean.total_cmp(&b.mean).then_with(|| a.tag.cmp(&b.tag)));
    neg.truncate(top_k);
    Ok(SentimentRanking { most_positive: pos, most_negative: neg })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::SentimentTriple;
    use proptest::prelude::*;

    fn rec(text: &str) -> MergedRecord {
        MergedRecord::new("x", text, SentimentTriple::new("x", 0.2, 0.1, 0.7).unwrap())
    }

    fn tags(list: &[&str]) -> MergedRecord {
        let mut r = rec("");
        r.hashtags = list.iter().map(|s| s.to_string()).collect();
        r
    }

    fn small_taxonomy() -> ThemeTaxonomy {
        ThemeTaxonomy::parse("sustainability: sustainable\nluxury: luxury\naccessories: handbag").unwrap()
    }

    #[test]
    fn tag_examples() {
        let tax = small_taxonomy();
        assert_eq!(
            tag_themes(&rec("sustainable luxury handbag"), &tax),
            [ThemeId::Sustainability, ThemeId::Luxury, ThemeId::Accessories].into()
        );
        assert!(tag_themes(&rec("good morning world"), &tax).is_empty());

        let shared = ThemeTaxonomy::parse("vintage: retro\nstreetwear: retro").unwrap();
        assert_eq!(tag_themes(&rec("retro look"), &shared), [ThemeId::Vintage, ThemeId::Streetwear].into());
    }

    #[test]
    fn taxonomy_errors() {
        assert!(matches!(ThemeTaxonomy::parse("gothic: black"), Err(ThemesError::UnknownTheme(_))));
        assert!(matches!(ThemeTaxonomy::parse("vintage: , "), Err(ThemesError::EmptyTheme(_))));
        assert!(matches!(ThemeTaxonomy::parse("vintage retro"), Err(ThemesError::Taxonomy { .. })));
    }

    #[test]
    fn default_taxonomy_covers_all_themes() {
        let tax = ThemeTaxonomy::default();
        assert_eq!(tax.keywords().len(), 7);
        assert!(tax.keywords()[&ThemeId::Vintage].contains("y2k"));
    }

    #[test]
    fn counts_are_per_theme_incidence() {
        let mut a = rec("");
        a.themes = [ThemeId::Vintage].into();
        let mut b = rec("");
        b.themes = [ThemeId::Vintage, ThemeId::Luxury].into();
        let c = rec("");
        let counts = theme_counts(&[a, b, c.clone()]);
        assert_eq!(counts[&ThemeId::Vintage], 2);
        assert_eq!(counts[&ThemeId::Luxury], 1);
        assert_eq!(counts[&ThemeId::Minimalist], 0);
        assert!(theme_counts(&[c]).values().all(|&v| v == 0));
    }

    #[test]
    fn frequency_examples() {
        let rs = [tags(&["a", "b"]), tags(&["a"]), tags(&["b"]), tags(&["a"])];
        assert_eq!(hashtag_frequency(&rs, 10).unwrap(), vec![("a".to_string(), 3), ("b".to_string(), 2)]);
        let tie = [tags(&["m", "k"]), tags(&["m", "k"])];
        assert_eq!(hashtag_frequency(&tie, 1).unwrap()[0].0, "k");
        assert!(matches!(hashtag_frequency(&tie, 0), Err(ThemesError::ZeroTopK)));
    }

    #[test]
    fn cooccurrence_examples() {
        let p = cooccurrence_pairs(&[tags(&["x", "y", "z"])], 10).unwrap();
        let got: Vec<(&str, &str, usize)> = p.iter().map(|c| (c.tag_a.as_str(), c.tag_b.as_str(), c.count)).collect();
        assert_eq!(got, [("x", "y", 1), ("x", "z", 1), ("y", "z", 1)]);

        let p = cooccurrence_pairs(&[tags(&["a", "b"]), tags(&["a", "b"]), tags(&["a"])], 10).unwrap();
        assert_eq!(p, vec![CooccurrencePair { tag_a: "a".into(), tag_b: "b".into(), count: 2 }]);
    }

    #[test]
    fn ranking_means_and_min_count() {
        // compound of (pos, 0) is pos/(pos+0.001); pick triples with known compounds.
        let mk = |pos: f64, tag: &str| {
            let mut r = MergedRecord::new("x", "", SentimentTriple::new("x", pos, 0.0, 1.0 - pos).unwrap());
            r.hashtags = vec![tag.to_string()];
            r
        };
        let rs = [mk(1.0, "u"), mk(0.5, "u"), mk(0.3, "single")];
        let rk = hashtag_sentiment_ranking(&rs, 2, Rubric::Original, 5).unwrap();
        assert_eq!(rk.most_positive.len(), 1);
        let want = (1.0 / 1.001 + 0.5 / 0.501) / 2.0;
        assert!((rk.most_positive[0].mean - want).abs() < 1e-12);
        assert_eq!(rk.most_negative[0].tag, "u");
    }

    proptest! {
        #[test]
        fn pair_count_is_d_choose_2(list in proptest::collection::vec("[a-e]{1,2}", 0..8)) {
            let r = tags(&list.iter().map(String::as_str).collect::<Vec<_>>());
            let d = r.hashtags.iter().collect::<BTreeSet<_>>().len();
            let total: usize = cooccurrence_pairs(&[r], usize::MAX).unwrap().iter().map(|p| p.count).sum();
            prop_assert_eq!(total, d * d.saturating_sub(1) / 2);
        }

        #[test]
        fn tagging_is_monotone(text in "[a-z ]{0,40}", extra in "[a-z]{1,4}") {
            let base = ThemeTaxonomy::default();
            let mut kws = base.keywords().clone();
            kws.get_mut(&ThemeId::Minimalist).unwrap().insert(extra);
            let bigger = ThemeTaxonomy::new(kws).unwrap();
            prop_assert!(base.tag(&text).is_subset(&bigger.tag(&text)));
        }
    }
}

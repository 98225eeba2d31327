//! Synthetic cross-platform and brand sentiment panels, and their
//! aggregation.
//!
//! Scores are drawn from a normal distribution clipped to `[-1, 1]`. The
//! location is solved so that the mean *after* clipping equals the target,
//! which matters for targets near the bounds.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::Rng as _;
use rand_distr::Normal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ingest::{clean_text, PhraseMatcher};
use crate::seeds;
use crate::statcore::normal_cdf;
use crate::themes::ThemeId;

pub const DEFAULT_DISPERSION: f64 = 0.15;
pub const MIN_PER_CELL: usize = 30;

#[derive(Debug, Error, PartialEq)]
pub enum PanelError {
    #[error("need at least {MIN_PER_CELL} samples per cell, got {0}")]
    TooFewPerCell(usize),
    #[error("target {0} outside [-1, 1]")]
    TargetOutOfRange(f64),
    #[error("dispersion must be positive, got {0}")]
    BadDispersion(f64),
    #[error("unknown platform `{0}`")]
    UnknownPlatform(String),
    #[error("unknown brand category `{0}`")]
    UnknownCategory(String),
    #[error("brand `{0}` listed twice")]
    DuplicateBrand(String),
    #[error("brand `{0}` has no aliases")]
    NoAliases(String),
    #[error("brand lexicon is empty")]
    EmptyLexicon,
    #[error("profile for {platform} lacks a target for {theme}")]
    MissingTarget { platform: Platform, theme: ThemeId },
}

pub type Result<T> = std::result::Result<T, PanelError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Platform {
    Twitter,
    Instagram,
    Pinterest,
    Tiktok,
    Reddit,
}

impl Platform {
    pub const ALL: [Platform; 5] = [Platform::Twitter, Platform::Instagram, Platform::Pinterest, Platform::Tiktok, Platform::Reddit];

    pub fn as_str(self) -> &'static str {
        match self {
            Platform::Twitter => "twitter",
            Platform::Instagram => "instagram",
            Platform::Pinterest => "pinterest",
            Platform::Tiktok => "tiktok",
            Platform::Reddit => "reddit",
        }
    }
}

impl fmt::Display for Platform {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Platform {
    type Err = PanelError;

    fn from_str(s: &str) -> Result<Self> {
        Platform::ALL
            .into_iter()
            .find(|p| p.as_str() == s.trim().to_ascii_lowercase())
            .ok_or_else(|| PanelError::UnknownPlatform(s.to_owned()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlatformProfile {
    pub platform: Platform,
    pub targets: BTreeMap<ThemeId, f64>,
    pub dispersion: f64,
}

impl PlatformProfile {
    pub fn validate(&self) -> Result<()> {
        if !(self.dispersion > 0.0 && self.dispersion.is_finite()) {
            return Err(PanelError::BadDispersion(self.dispersion));
        }
        for theme in ThemeId::ALL {
            let t = *self.targets.get(&theme).ok_or(PanelError::MissingTarget { platform: self.platform, theme })?;
            if !(-1.0..=1.0).contains(&t) {
                return Err(PanelError::TargetOutOfRange(t));
            }
        }
        Ok(())
    }
}

/// Per-theme targets in `ThemeId::ALL` order: vintage, luxury, accessories,
/// seasonal, sustainability, streetwear, minimalist.
const PLATFORM_TARGETS: [(Platform, [f64; 7]); 5] = [
    (Platform::Twitter, [0.58, 0.55, 0.60, 0.59, 0.53, 0.62, 0.58]),
    (Platform::Instagram, [0.88, 0.84, 0.90, 0.87, 0.86, 0.86, 0.89]),
    (Platform::Pinterest, [0.89, 0.82, 0.90, 0.88, 0.88, 0.83, 0.91]),
    (Platform::Tiktok, [0.70, 0.66, 0.78, 0.72, 0.70, 0.75, 0.71]),
    (Platform::Reddit, [0.42, 0.17, 0.44, 0.40, 0.45, 0.38, 0.35]),
];

pub fn default_profiles() -> Vec<PlatformProfile> {
    PLATFORM_TARGETS
        .iter()
        .map(|(platform, t)| PlatformProfile {
            platform: *platform,
            targets: ThemeId::ALL.iter().copied().zip(t.iter().copied()).collect(),
            dispersion: DEFAULT_DISPERSION,
        })
        .collect()
}

fn normal_pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Mean of `clamp(X, -1, 1)` for `X ~ N(loc, scale^2)`.
pub fn clipped_normal_mean(loc: f64, scale: f64) -> f64 {
    let a = (-1.0 - loc) / scale;
    let b = (1.0 - loc) / scale;
    let (fa, fb) = (normal_cdf(a), normal_cdf(b));
    -fa + (1.0 - fb) + loc * (fb - fa) + scale * (normal_pdf(a) - normal_pdf(b))
}

/// Location whose clipped mean equals `target`.
pub fn calibrate_location(target: f64, scale: f64) -> Result<f64> {
    if !(-1.0..=1.0).contains(&target) {
        return Err(PanelError::TargetOutOfRange(target));
    }
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(PanelError::BadDispersion(scale));
    }
    let (mut lo, mut hi) = (-1.0 - 10.0 * scale, 1.0 + 10.0 * scale);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if clipped_normal_mean(mid, scale) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// `n` clipped-normal draws with clipped mean `target`.
pub fn sample_scores(target: f64, scale: f64, n: usize, seed: u64) -> Result<Vec<f64>> {
    let loc = calibrate_location(target, scale)?;
    let dist = Normal::new(loc, scale).map_err(|_| PanelError::BadDispersion(scale))?;
    let mut rng = seeds::rng(seed);
    Ok((0..n).map(|_| rng.sample(dist).clamp(-1.0, 1.0)).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PanelRecord {
    pub platform: Platform,
    pub theme: ThemeId,
    pub score: f64,
}

/// `n_per_cell` scores for each (platform, theme) cell. Cell `(i, j)` uses
/// its own seed stream, so cells are independent of each other and of the
/// thread count.
pub fn generate_platform_panel(profiles: &[PlatformProfile], n_per_cell: usize, seed: u64) -> Result<Vec<PanelRecord>> {
    if n_per_cell < MIN_PER_CELL {
        return Err(PanelError::TooFewPerCell(n_per_cell));
    }
    for p in profiles {
        p.validate()?;
    }
    let cells: Vec<(Platform, ThemeId, f64, f64)> =
        profiles.iter().flat_map(|p| ThemeId::ALL.iter().map(move |&t| (p.platform, t, p.targets[&t], p.dispersion))).collect();
    let chunks: Vec<Vec<PanelRecord>> = cells
        .par_iter()
        .map(|&(platform, theme, target, scale)| {
            let cell = (platform as u64) * ThemeId::ALL.len() as u64 + theme as u64;
            let scores = sample_scores(target, scale, n_per_cell, seeds::derive_indexed(seed, "platform_panel", cell))?;
            Ok(scores.into_iter().map(|score| PanelRecord { platform, theme, score }).collect())
        })
        .collect::<Result<_>>()?;
    Ok(chunks.into_iter().flatten().collect())
}

/// Mean score per (platform, theme), rows in `Platform::ALL` order and
/// columns in `ThemeId::ALL` order. Empty cells are `None`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Heatmap {
    pub platforms: Vec<Platform>,
    pub themes: Vec<ThemeId>,
    pub values: Vec<Vec<Option<f64>>>,
}

impl Heatmap {
    pub fn get(&self, platform: Platform, theme: ThemeId) -> Option<f64> {
        let i = self.platforms.iter().position(|&p| p == platform)?;
        let j = self.themes.iter().position(|&t| t == theme)?;
        self.values[i][j]
    }
}

pub fn platform_heatmap(records: &[PanelRecord]) -> Heatmap {
    let mut sums = BTreeMap::<(Platform, ThemeId), (f64, usize)>::new();
    for r in records {
        let e = sums.entry((r.platform, r.theme)).or_default();
        e.0 += r.score;
        e.1 += 1;
    }
    let values =
        Platform::ALL.iter().map(|&p| ThemeId::ALL.iter().map(|&t| sums.get(&(p, t)).map(|(s, n)| s / *n as f64)).collect()).collect();
    Heatmap { platforms: Platform::ALL.to_vec(), themes: ThemeId::ALL.to_vec(), values }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BrandCategory {
    Luxury,
    FastFashion,
    Sportswear,
    Sustainable,
}

impl BrandCategory {
    pub const ALL: [BrandCategory; 4] =
        [BrandCategory::Luxury, BrandCategory::FastFashion, BrandCategory::Sportswear, BrandCategory::Sustainable];

    pub fn as_str(self) -> &'static str {
        match self {
            BrandCategory::Luxury => "luxury",
            BrandCategory::FastFashion => "fast_fashion",
            BrandCategory::Sportswear => "sportswear",
            BrandCategory::Sustainable => "sustainable",
        }
    }
}

impl fmt::Display for BrandCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for BrandCategory {
    type Err = PanelError;

    fn from_str(s: &str) -> Result<Self> {
        BrandCategory::ALL
            .into_iter()
            .find(|c| c.as_str() == s.trim().to_ascii_lowercase())
            .ok_or_else(|| PanelError::UnknownCategory(s.to_owned()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Brand {
    pub name: String,
    pub category: BrandCategory,
    pub aliases: Vec<String>,
    /// Mean sentiment used when generating a synthetic panel.
    pub target: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BrandLexicon {
    brands: Vec<Brand>,
}

impl BrandLexicon {
    pub fn new(brands: Vec<Brand>) -> Result<Self> {
        if brands.is_empty() {
            return Err(PanelError::EmptyLexicon);
        }
        let mut seen = std::collections::BTreeSet::new();
        for b in &brands {
            if !seen.insert(b.name.to_lowercase()) {
                return Err(PanelError::DuplicateBrand(b.name.clone()));
            }
            if b.aliases.iter().all(|a| clean_text(a).is_empty()) {
                return Err(PanelError::NoAliases(b.name.clone()));
            }
            if !(-1.0..=1.0).contains(&b.target) {
                return Err(PanelError::TargetOutOfRange(b.target));
            }
        }
        Ok(Self { brands })
    }

    pub fn brands(&self) -> &[Brand] {
        &self.brands
    }
}

const DEFAULT_BRANDS: [(&str, BrandCategory, &[&str], f64); 17] = [
    ("Dior", BrandCategory::Luxury, &["dior"], 0.72),
    ("Louis Vuitton", BrandCategory::Luxury, &["louis vuitton", "louisvuitton", "lv"], 0.67),
    ("Prada", BrandCategory::Luxury, &["prada"], 0.66),
    ("Gucci", BrandCategory::Luxury, &["gucci"], 0.43),
    ("Zara", BrandCategory::FastFashion, &["zara"], 0.34),
    ("Topshop", BrandCategory::FastFashion, &["topshop"], 0.35),
    ("Primark", BrandCategory::FastFashion, &["primark"], 0.35),
    ("H&M", BrandCategory::FastFashion, &["h&m", "hm"], 0.58),
    ("Uniqlo", BrandCategory::FastFashion, &["uniqlo"], 0.68),
    ("Nike", BrandCategory::Sportswear, &["nike"], 0.75),
    ("Lululemon", BrandCategory::Sportswear, &["lululemon"], 0.75),
    ("Adidas", BrandCategory::Sportswear, &["adidas"], 0.66),
    ("Puma", BrandCategory::Sportswear, &["puma"], 0.60),
    ("Patagonia", BrandCategory::Sustainable, &["patagonia"], 0.83),
    ("Stella McCartney", BrandCategory::Sustainable, &["stella mccartney", "stellamccartney"], 0.82),
    ("Reformation", BrandCategory::Sustainable, &["reformation"], 0.79),
    ("Everlane", BrandCategory::Sustainable, &["everlane"], 0.60),
];

impl Default for BrandLexicon {
    fn default() -> Self {
        let brands = DEFAULT_BRANDS
            .iter()
            .map(|(name, category, aliases, target)| Brand {
                name: (*name).to_owned(),
                category: *category,
                aliases: aliases.iter().map(|a| (*a).to_owned()).collect(),
                target: *target,
            })
            .collect();
        Self::new(brands).expect("default lexicon is valid")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BrandRecord {
    pub brand: String,
    pub category: BrandCategory,
    pub text: String,
    pub score: f64,
}

const TEMPLATES: [&str; 6] = [
    "just picked up something new from {}",
    "thoughts on the latest {} drop",
    "{} has been all over my feed this week",
    "wearing {} today for the first time",
    "is {} worth it this season",
    "the new {} collection is finally here",
];

/// `n_per_brand` synthetic posts per brand, each naming one of its aliases,
/// with clipped-normal scores around the brand target.
pub fn generate_brand_panel(lexicon: &BrandLexicon, n_per_brand: usize, dispersion: f64, seed: u64) -> Result<Vec<BrandRecord>> {
    if n_per_brand < MIN_PER_CELL {
        return Err(PanelError::TooFewPerCell(n_per_brand));
    }
    let chunks: Vec<Vec<BrandRecord>> = lexicon
        .brands
        .par_iter()
        .enumerate()
        .map(|(i, b)| {
            let s = seeds::derive_indexed(seed, "brand_panel", i as u64);
            let scores = sample_scores(b.target, dispersion, n_per_brand, s)?;
            Ok(scores
                .into_iter()
                .enumerate()
                .map(|(k, score)| BrandRecord {
                    brand: b.name.clone(),
                    category: b.category,
                    text: TEMPLATES[k % TEMPLATES.len()].replace("{}", &b.aliases[k % b.aliases.len()]),
                    score,
                })
                .collect())
        })
        .collect::<Result<_>>()?;
    Ok(chunks.into_iter().flatten().collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BrandStat {
    pub category: BrandCategory,
    pub mean: f64,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BrandSentiment {
    pub per_brand: BTreeMap<String, BrandStat>,
    /// Mean of the brand means within each category.
    pub per_category: BTreeMap<BrandCategory, f64>,
}

/// Attributes each `(text, score)` to every brand whose alias occurs as a
/// whole word sequence in the cleaned text.
pub fn brand_sentiment<'a, I>(records: I, lexicon: &BrandLexicon) -> BrandSentiment
where
    I: IntoIterator<Item = (&'a str, f64)>,
{
    let matchers: Vec<PhraseMatcher> = lexicon.brands.iter().map(|b| PhraseMatcher::new(&b.aliases)).collect();
    let mut sums = vec![(0.0, 0usize); lexicon.brands.len()];
    for (text, score) in records {
        let clean = clean_text(text);
        for (m, s) in matchers.iter().zip(&mut sums) {
            if m.matches(&clean) {
                s.0 += score;
                s.1 += 1;
            }
        }
    }
    let per_brand: BTreeMap<String, BrandStat> = lexicon
        .brands
        .iter()
        .zip(&sums)
        .filter(|(_, s)| s.1 > 0)
        .map(|(b, s)| (b.name.clone(), BrandStat { category: b.category, mean: s.0 / s.1 as f64, n: s.1 }))
        .collect();
    let mut cat: BTreeMap<BrandCategory, (f64, usize)> = BTreeMap::new();
    for stat in per_brand.values() {
        let e = cat.entry(stat.category).or_default();
        e.0 += stat.mean;
        e.1 += 1;
    }
    BrandSentiment { per_brand, per_category: cat.into_iter().map(|(c, (s, n))| (c, s / n as f64)).collect() }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cell_mean(panel: &[PanelRecord], p: Platform, t: ThemeId) -> f64 {
        let v: Vec<f64> = panel.iter().filter(|r| r.platform == p && r.theme == t).map(|r| r.score).collect();
        v.iter().sum::<f64>() / v.len() as f64
    }

    #[test]
    fn clipped_mean_matches_quadrature() {
        // Midpoint rule over the clipped integrand.
        for (loc, scale) in [(0.91, 0.15), (0.0, 0.5), (-0.95, 0.3)] {
            let n = 200_000;
            let (lo, hi) = (loc - 10.0 * scale, loc + 10.0 * scale);
            let h = (hi - lo) / n as f64;
            let q: f64 = (0..n)
                .map(|i| {
                    let x = lo + (i as f64 + 0.5) * h;
                    x.clamp(-1.0, 1.0) * normal_pdf((x - loc) / scale) / scale * h
                })
                .sum();
            assert!((q - clipped_normal_mean(loc, scale)).abs() < 1e-8, "{loc} {scale}");
        }
    }

    #[test]
    fn calibration_inverts_clipped_mean() {
        let loc = calibrate_location(0.91, 0.15).unwrap();
        assert!(loc > 0.91);
        assert!((clipped_normal_mean(loc, 0.15) - 0.91).abs() < 1e-12);
    }

    #[test]
    fn reference_cells() {
        let panel = generate_platform_panel(&default_profiles(), 1000, 1).unwrap();
        assert!((cell_mean(&panel, Platform::Pinterest, ThemeId::Minimalist) - 0.91).abs() < 0.03);
        assert!((cell_mean(&panel, Platform::Reddit, ThemeId::Luxury) - 0.17).abs() < 0.03);
        assert!(panel.iter().all(|r| (-1.0..=1.0).contains(&r.score)));
    }

    #[test]
    fn all_cells_converge() {
        let profiles = default_profiles();
        let panel = generate_platform_panel(&profiles, 1000, 2).unwrap();
        let bound = 3.0 * DEFAULT_DISPERSION / (1000f64).sqrt();
        for p in &profiles {
            for (&t, &target) in &p.targets {
                assert!((cell_mean(&panel, p.platform, t) - target).abs() < bound, "{} {}", p.platform, t);
            }
        }
    }

    #[test]
    fn deterministic_panel() {
        let a = generate_platform_panel(&default_profiles(), 50, 3).unwrap();
        let b = generate_platform_panel(&default_profiles(), 50, 3).unwrap();
        assert_eq!(a, b);
        assert!(matches!(generate_platform_panel(&default_profiles(), 10, 3), Err(PanelError::TooFewPerCell(10))));
    }

    #[test]
    fn heatmap_shape() {
        let panel = generate_platform_panel(&default_profiles(), 40, 4).unwrap();
        let h = platform_heatmap(&panel);
        assert_eq!(h.values.len(), 5);
        assert!(h.values.iter().all(|row| row.len() == 7 && row.iter().all(Option::is_some)));
    }

    #[test]
    fn brand_arithmetic() {
        let lex = BrandLexicon::default();
        let s = brand_sentiment([("Love my new Patagonia jacket", 0.8), ("patagonia fleece", 0.86)], &lex);
        assert!((s.per_brand["Patagonia"].mean - 0.83).abs() < 1e-12);
        let both = brand_sentiment([("nike or adidas?", 0.5)], &lex);
        assert_eq!(both.per_brand.len(), 2);
        // Whole words only.
        assert!(brand_sentiment([("pumas in the zoo", 0.1)], &lex).per_brand.is_empty());
        let hm = brand_sentiment([("new H&M haul", 0.4)], &lex);
        assert!(hm.per_brand.contains_key("H&M"));
    }

    #[test]
    fn category_targets_and_order() {
        let lex = BrandLexicon::default();
        let mut by_cat: BTreeMap<BrandCategory, Vec<f64>> = BTreeMap::new();
        for b in lex.brands() {
            by_cat.entry(b.category).or_default().push(b.target);
        }
        let mean = |c| {
            let v = &by_cat[&c];
            v.iter().sum::<f64>() / v.len() as f64
        };
        assert!((mean(BrandCategory::Sustainable) - 0.76).abs() < 0.005);
        assert!((mean(BrandCategory::Sportswear) - 0.69).abs() < 0.005);
        assert!((mean(BrandCategory::Luxury) - 0.62).abs() < 0.005);
        assert!((mean(BrandCategory::FastFashion) - 0.46).abs() < 0.005);

        let panel = generate_brand_panel(&lex, 500, DEFAULT_DISPERSION, 8).unwrap();
        let s = brand_sentiment(panel.iter().map(|r| (r.text.as_str(), r.score)), &lex);
        assert_eq!(s.per_brand.len(), 17);
        let c = &s.per_category;
        assert!(c[&BrandCategory::Sustainable] > c[&BrandCategory::Sportswear]);
        assert!(c[&BrandCategory::Sportswear] > c[&BrandCategory::Luxury]);
        assert!(c[&BrandCategory::Luxury] > c[&BrandCategory::FastFashion]);
    }

    proptest! {
        #[test]
        fn category_mean_order_free(seed in 0u64..50) {
            let lex = BrandLexicon::default();
            let panel = generate_brand_panel(&lex, 30, DEFAULT_DISPERSION, seed).unwrap();
            let a = brand_sentiment(panel.iter().map(|r| (r.text.as_str(), r.score)), &lex);
            let mut shuffled = lex.brands().to_vec();
            shuffled.reverse();
            let rev = BrandLexicon::new(shuffled).unwrap();
            let b = brand_sentiment(panel.iter().map(|r| (r.text.as_str(), r.score)), &rev);
            for (k, v) in &a.per_category {
                prop_assert!((v - b.per_category[k]).abs() < 1e-12);
            }
        }
    }
}

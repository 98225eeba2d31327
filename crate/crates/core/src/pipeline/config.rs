//! Run configuration: defaults, a TOML key/value file, and overrides.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{PipelineError, Stage};
use crate::sentiment::Rubric;
use crate::themes::ThemeId;

pub const DEFAULT_SEED: u64 = 42;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    /// `id,text` corpus.
    pub input: Option<PathBuf>,
    /// `TWID,NEG,NEU,POS` score table.
    pub t4sa: Option<PathBuf>,
    pub keywords: Option<PathBuf>,
    pub taxonomy: Option<PathBuf>,
    /// Optional real `platform,theme,score` table aggregated instead of the
    /// synthetic platform panel.
    pub platform_data: Option<PathBuf>,
    pub seed: u64,
    pub rubric: Rubric,
    pub out: PathBuf,
    /// Worker threads; `None` uses every core.
    pub jobs: Option<usize>,
    /// Stages to run, in pipeline order. Empty means all of them.
    pub stages: Vec<Stage>,
    pub seasonal_themes: BTreeSet<ThemeId>,
    pub hashtag_substring: bool,
    pub decompose_sentiment: bool,
    /// Confidence downgrade threshold for sparse themes; `None` disables it.
    pub sparse_records: Option<u64>,
    pub folds: usize,
    pub n_trees: usize,
    pub panel_n: usize,
    pub brand_n: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            input: None,
            t4sa: None,
            keywords: None,
            taxonomy: None,
            platform_data: None,
            seed: DEFAULT_SEED,
            rubric: Rubric::Improved,
            out: PathBuf::from("out"),
            jobs: None,
            stages: Vec::new(),
            seasonal_themes: [ThemeId::Seasonal, ThemeId::Accessories].into_iter().collect(),
            hashtag_substring: false,
            decompose_sentiment: false,
            sparse_records: Some(crate::trends::DEFAULT_SPARSE_RECORDS),
            folds: crate::classify::DEFAULT_FOLDS,
            n_trees: 100,
            panel_n: 200,
            brand_n: 100,
        }
    }
}

impl RunConfig {
    /// Stages that will run, in pipeline order.
    pub fn selected_stages(&self) -> Vec<Stage> {
        if self.stages.is_empty() {
            return Stage::ALL.to_vec();
        }
        Stage::ALL.into_iter().filter(|s| self.stages.contains(s)).collect()
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        let bad = |msg: &str| Err(PipelineError::Config(msg.to_owned()));
        if self.jobs == Some(0) {
            return bad("jobs must be at least 1");
        }
        if self.folds < 2 {
            return bad("folds must be at least 2");
        }
        if self.n_trees == 0 {
            return bad("n_trees must be at least 1");
        }
        if self.panel_n < crate::panels::MIN_PER_CELL || self.brand_n < crate::panels::MIN_PER_CELL {
            return bad("panel_n and brand_n must be at least 30");
        }
        Ok(())
    }
}

/// Every setting as an optional override. The same keys are accepted in a
/// config file and map one-to-one onto command-line flags.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigOverrides {
    pub input: Option<PathBuf>,
    pub t4sa: Option<PathBuf>,
    pub keywords: Option<PathBuf>,
    pub taxonomy: Option<PathBuf>,
    pub platform_data: Option<PathBuf>,
    pub seed: Option<u64>,
    pub rubric: Option<String>,
    pub out: Option<PathBuf>,
    pub jobs: Option<usize>,
    /// Comma-separated stage names, or `all`.
    pub stages: Option<String>,
    /// Comma-separated theme names.
    pub seasonal_themes: Option<String>,
    pub hashtag_substring: Option<bool>,
    pub decompose_sentiment: Option<bool>,
    /// 0 disables the downgrade.
    pub sparse_records: Option<u64>,
    pub folds: Option<usize>,
    pub n_trees: Option<usize>,
    pub panel_n: Option<usize>,
    pub brand_n: Option<usize>,
}

impl ConfigOverrides {
    /// Parses a config file. Relative paths inside it are taken relative to
    /// the file's directory.
    pub fn load(path: &Path) -> Result<Self, PipelineError> {
        let text = std::fs::read_to_string(path).map_err(|_| PipelineError::MissingInput { stage: None, path: path.to_owned() })?;
        let mut o: Self = toml::from_str(&text).map_err(|e| PipelineError::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new(""));
        for p in [&mut o.input, &mut o.t4sa, &mut o.keywords, &mut o.taxonomy, &mut o.platform_data, &mut o.out].into_iter().flatten() {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(o)
    }

    pub fn apply(&self, cfg: &mut RunConfig) -> Result<(), PipelineError> {
        fn set<T: Clone>(dst: &mut T, src: &Option<T>) {
            if let Some(v) = src {
                *dst = v.clone();
            }
        }
        fn set_opt<T: Clone>(dst: &mut Option<T>, src: &Option<T>) {
            if src.is_some() {
                dst.clone_from(src);
            }
        }
        set_opt(&mut cfg.input, &self.input);
        set_opt(&mut cfg.t4sa, &self.t4sa);
        set_opt(&mut cfg.keywords, &self.keywords);
        set_opt(&mut cfg.taxonomy, &self.taxonomy);
        set_opt(&mut cfg.platform_data, &self.platform_data);
        set(&mut cfg.seed, &self.seed);
        set(&mut cfg.out, &self.out);
        set_opt(&mut cfg.jobs, &self.jobs);
        set(&mut cfg.hashtag_substring, &self.hashtag_substring);
        set(&mut cfg.decompose_sentiment, &self.decompose_sentiment);
        set(&mut cfg.folds, &self.folds);
        set(&mut cfg.n_trees, &self.n_trees);
        set(&mut cfg.panel_n, &self.panel_n);
        set(&mut cfg.brand_n, &self.brand_n);
        if let Some(r) = &self.rubric {
            cfg.rubric = r.parse().map_err(|e| PipelineError::Config(format!("{e}")))?;
        }
        if let Some(s) = &self.stages {
            cfg.stages = parse_stages(s)?;
        }
        if let Some(t) = &self.seasonal_themes {
            cfg.seasonal_themes = t
                .split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(|s| s.parse::<ThemeId>().map_err(|e| PipelineError::Config(e.to_string())))
                .collect::<Result<_, _>>()?;
        }
        if let Some(n) = self.sparse_records {
            cfg.sparse_records = (n > 0).then_some(n);
        }
        Ok(())
    }
}

/// `"trends,forecast"` or `"all"`.
pub fn parse_stages(s: &str) -> Result<Vec<Stage>, PipelineError> {
    let mut out = Vec::new();
    for name in s.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        if name == "all" {
            return Ok(Vec::new());
        }
        out.push(name.parse()?);
    }
    if out.is_empty() {
        return Err(PipelineError::Config("empty stage list".into()));
    }
    Ok(out)
}

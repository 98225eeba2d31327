//! Stage orchestration. Each stage reads the artifacts of earlier stages
//! from the output directory and writes its own, so any stage can be rerun
//! on cached intermediates.
//!
//! | stage | reads | writes |
//! |---|---|---|
//! | ingest | corpus, score table | `records.csv`, `join_summary.json` |
//! | themes | `records.csv` | `tagged.csv`, `theme_counts.csv`, `hashtags.csv`, `cooccurrence.csv`, `hashtag_sentiment.json` |
//! | sentiment | `records.csv` | `scored.csv`, `distribution.json` |
//! | series | `records.csv`, `tagged.csv` | `weeks.csv`, `series.csv` |
//! | decompose | `series.csv` | `decomposition/<theme>.csv` |
//! | trends | `series.csv` | `trends.json` |
//! | forecast | `series.csv` | `forecasts.csv`, `forecasts.json`, `forecast_normalized.csv`, `models.json` |
//! | causality | `series.csv` | `network.dot`, `network.json`, `causality_lags.csv` |
//! | classify | `records.csv` | `classifier_report.json`, `confusion.csv`, `model.json` |
//! | panels | | `platform_panel.csv`, `platform_heatmap.csv`, `brand_panel.csv`, `brand_sentiment.json` |
//! | report | all of the above | `summary.json`, `plots/*.csv` |

mod artifacts;
pub mod config;
mod report;
mod stages;

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use config::{parse_stages, ConfigOverrides, RunConfig};

pub type BoxError = Box<dyn std::error::Error + Send + Sync>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Ingest,
    Themes,
    Sentiment,
    Series,
    Decompose,
    Trends,
    Forecast,
    Causality,
    Classify,
    Panels,
    Report,
}

impl Stage {
    pub const ALL: [Stage; 11] = [
        Stage::Ingest,
        Stage::Themes,
        Stage::Sentiment,
        Stage::Series,
        Stage::Decompose,
        Stage::Trends,
        Stage::Forecast,
        Stage::Causality,
        Stage::Classify,
        Stage::Panels,
        Stage::Report,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Stage::Ingest => "ingest",
            Stage::Themes => "themes",
            Stage::Sentiment => "sentiment",
            Stage::Series => "series",
            Stage::Decompose => "decompose",
            Stage::Trends => "trends",
            Stage::Forecast => "forecast",
            Stage::Causality => "causality",
            Stage::Classify => "classify",
            Stage::Panels => "panels",
            Stage::Report => "report",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Stage {
    type Err = PipelineError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Stage::ALL.into_iter().find(|st| st.as_str() == s.trim()).ok_or_else(|| PipelineError::Config(format!("unknown stage `{s}`")))
    }
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("{}missing input file: {}", stage.map(|s| format!("stage {s}: ")).unwrap_or_default(), path.display())]
    MissingInput { stage: Option<Stage>, path: PathBuf },
    #[error("configuration: {0}")]
    Config(String),
    #[error("stage {stage}: {source}")]
    Stage {
        stage: Stage,
        #[source]
        source: BoxError,
    },
}

impl PipelineError {
    /// 2 for missing files and bad configuration, 1 for stage failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::MissingInput { .. } | PipelineError::Config(_) => 2,
            PipelineError::Stage { .. } => 1,
        }
    }
}

pub(crate) trait StageResult<T> {
    fn in_stage(self, stage: Stage) -> Result<T, PipelineError>;
}

impl<T, E: Into<BoxError>> StageResult<T> for Result<T, E> {
    fn in_stage(self, stage: Stage) -> Result<T, PipelineError> {
        self.map_err(|e| PipelineError::Stage { stage, source: e.into() })
    }
}

/// What a run did.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunOutput {
    pub stages: Vec<Stage>,
    /// Files written, relative to the output directory, in write order.
    pub artifacts: Vec<PathBuf>,
    /// Trend table for standard output, when the trends stage ran.
    pub trend_table: Option<String>,
}

/// Runs the selected stages in order on a pool of `cfg.jobs` threads.
pub fn run_pipeline(cfg: &RunConfig) -> Result<RunOutput, PipelineError> {
    cfg.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs.unwrap_or(0))
        .build()
        .map_err(|e| PipelineError::Config(format!("thread pool: {e}")))?;
    std::fs::create_dir_all(&cfg.out).map_err(|e| PipelineError::Config(format!("output directory {}: {e}", cfg.out.display())))?;
    pool.install(|| {
        let mut ctx = stages::Context::new(cfg);
        for stage in cfg.selected_stages() {
            stages::run(stage, &mut ctx)?;
            ctx.output.stages.push(stage);
        }
        Ok(ctx.output)
    })
}

/// Files under `dir`, relative and sorted, for bundle manifests.
pub fn bundle_files(dir: &Path) -> std::io::Result<Vec<PathBuf>> {
    fn walk(root: &Path, dir: &Path, out: &mut Vec<PathBuf>) -> std::io::Result<()> {
        for entry in std::fs::read_dir(dir)? {
            let path = entry?.path();
            if path.is_dir() {
                walk(root, &path, out)?;
            } else {
                out.push(path.strip_prefix(root).expect("under root").to_owned());
            }
        }
        Ok(())
    }
    let mut out = Vec::new();
    walk(dir, dir, &mut out)?;
    out.sort();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stage_names_round_trip() {
        for s in Stage::ALL {
            assert_eq!(s.as_str().parse::<Stage>().unwrap(), s);
        }
    }

    #[test]
    fn exit_codes() {
        let missing = PipelineError::MissingInput { stage: Some(Stage::Ingest), path: "x.csv".into() };
        assert_eq!(missing.exit_code(), 2);
        assert!(missing.to_string().contains("x.csv"));
        assert!(missing.to_string().contains("ingest"));
        let failed: Result<(), _> = Err("boom").in_stage(Stage::Trends);
        let failed = failed.unwrap_err();
        assert_eq!(failed.exit_code(), 1);
        assert_eq!(failed.to_string(), "stage trends: boom");
    }
}

//! Stage bodies.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use super::artifacts::{self as art, num, opt};
use super::{report, PipelineError, RunConfig, RunOutput, Stage, StageResult};
use crate::causality::{self, CausalNetwork};
use crate::chronos::{self, ThemeSeries, N_WEEKS};
use crate::classify::{self, ForestConfig, TextClassifier};
use crate::forecast::{self, GridOptions, HORIZON};
use crate::ingest::{self, FilterStats, IngestError, JoinStats};
use crate::panels::{self, PanelRecord, Platform};
use crate::seeds;
use crate::sentiment::{self, CompoundScores, Rubric};
use crate::themes::{self, ThemeId, ThemeTaxonomy};
use crate::trends::{self, TrendOptions};

const TOP_HASHTAGS: usize = 20;
const TOP_PAIRS: usize = 20;
const HASHTAG_MIN_COUNT: usize = 3;
const HASHTAG_TOP_SENTIMENT: usize = 10;

pub struct Context<'a> {
    pub cfg: &'a RunConfig,
    pub output: RunOutput,
}

impl<'a> Context<'a> {
    pub fn new(cfg: &'a RunConfig) -> Self {
        Self { cfg, output: RunOutput::default() }
    }

    pub fn path(&self, rel: &str) -> PathBuf {
        self.cfg.out.join(rel)
    }

    /// Path of an upstream artifact, which must exist.
    pub fn input(&self, stage: Stage, rel: &str) -> Result<PathBuf, PipelineError> {
        let p = self.path(rel);
        if p.exists() {
            Ok(p)
        } else {
            Err(PipelineError::MissingInput { stage: Some(stage), path: p })
        }
    }

    pub fn write(&mut self, stage: Stage, rel: &str, bytes: &[u8]) -> Result<(), PipelineError> {
        let p = self.path(rel);
        if let Some(dir) = p.parent() {
            std::fs::create_dir_all(dir).in_stage(stage)?;
        }
        std::fs::write(&p, bytes).map_err(|e| format!("cannot write {}: {e}", p.display())).in_stage(stage)?;
        self.output.artifacts.push(PathBuf::from(rel));
        Ok(())
    }

    pub fn write_json<T: Serialize + ?Sized>(&mut self, stage: Stage, rel: &str, value: &T) -> Result<(), PipelineError> {
        let bytes = art::json_bytes(value).in_stage(stage)?;
        self.write(stage, rel, &bytes)
    }
}

pub fn run(stage: Stage, ctx: &mut Context) -> Result<(), PipelineError> {
    match stage {
        Stage::Ingest => ingest_stage(ctx),
        Stage::Themes => themes_stage(ctx),
        Stage::Sentiment => sentiment_stage(ctx),
        Stage::Series => series_stage(ctx),
        Stage::Decompose => decompose_stage(ctx),
        Stage::Trends => trends_stage(ctx),
        Stage::Forecast => forecast_stage(ctx),
        Stage::Causality => causality_stage(ctx),
        Stage::Classify => classify_stage(ctx),
        Stage::Panels => panels_stage(ctx),
        Stage::Report => report::run(ctx),
    }
}

fn required(stage: Stage, p: &Option<PathBuf>, flag: &str) -> Result<PathBuf, PipelineError> {
    p.clone().ok_or_else(|| PipelineError::Config(format!("stage {stage} needs --{flag}")))
}

fn ingest_err(stage: Stage, e: IngestError) -> PipelineError {
    match e {
        IngestError::NotFound(path) => PipelineError::MissingInput { stage: Some(stage), path },
        other => PipelineError::Stage { stage, source: other.into() },
    }
}

fn existing(stage: Stage, p: &Path) -> Result<(), PipelineError> {
    if p.exists() {
        Ok(())
    } else {
        Err(PipelineError::MissingInput { stage: Some(stage), path: p.to_owned() })
    }
}

#[derive(Serialize)]
struct JoinSummary {
    join: JoinStats,
    filter: FilterStats,
    hashtag_substring: bool,
}

fn ingest_stage(ctx: &mut Context) -> Result<(), PipelineError> {
    let st = Stage::Ingest;
    let cfg = ctx.cfg;
    let input = required(st, &cfg.input, "input")?;
    let scores = required(st, &cfg.t4sa, "t4sa")?;
    let texts = ingest::load_text_corpus(&input).map_err(|e| ingest_err(st, e))?;
    let triples = ingest::load_t4sa(&scores).map_err(|e| ingest_err(st, e))?;
    let keywords = match &cfg.keywords {
        Some(p) => ingest::load_keywords(p).map_err(|e| ingest_err(st, e))?,
        None => ingest::default_keywords(),
    };
    let (merged, join) = ingest::merge_by_id(&texts, &triples);
    let (kept, filter) = ingest::filter_fashion(merged, &keywords, cfg.hashtag_substring).in_stage(st)?;
    if kept.is_empty() {
        return Err("no fashion-related records after filtering").in_stage(st);
    }
    let bytes = art::write_records(&kept).in_stage(st)?;
    ctx.write(st, "records.csv", &bytes)?;
    ctx.write_json(st, "join_summary.json", &JoinSummary { join, filter, hashtag_substring: cfg.hashtag_substring })
}

fn load_records(ctx: &Context, st: Stage) -> Result<Vec<ingest::MergedRecord>, PipelineError> {
    let p = ctx.input(st, "records.csv")?;
    art::read_records(&p).in_stage(st)
}

fn themes_stage(ctx: &mut Context) -> Result<(), PipelineError> {
    let st = Stage::Themes;
    let mut records = load_records(ctx, st)?;
    let taxonomy = match &ctx.cfg.taxonomy {
        Some(p) => {
            existing(st, p)?;
            ThemeTaxonomy::load(p).in_stage(st)?
        }
        None => ThemeTaxonomy::default(),
    };
    themes::tag_all(&mut records, &taxonomy);

    let tagged = art::write_tagged(&records).in_stage(st)?;
    ctx.write(st, "tagged.csv", &tagged)?;
    let counts = themes::theme_counts(&records);
    let bytes = art::csv_bytes(&["theme", "count"], counts.iter().map(|(t, c)| vec![t.to_string(), c.to_string()])).in_stage(st)?;
    ctx.write(st, "theme_counts.csv", &bytes)?;

    let freq = themes::hashtag_frequency(&records, TOP_HASHTAGS).in_stage(st)?;
    let bytes = art::csv_bytes(&["hashtag", "count"], freq.into_iter().map(|(t, c)| vec![t, c.to_string()])).in_stage(st)?;
    ctx.write(st, "hashtags.csv", &bytes)?;
    let pairs = themes::cooccurrence_pairs(&records, TOP_PAIRS).in_stage(st)?;
    let bytes = art::csv_bytes(&["tag_a", "tag_b", "count"], pairs.into_iter().map(|p| vec![p.tag_a, p.tag_b, p.count.to_string()]))
        .in_stage(st)?;
    ctx.write(st, "cooccurrence.csv", &bytes)?;
    let ranking = themes::hashtag_sentiment_ranking(&records, HASHTAG_MIN_COUNT, ctx.cfg.rubric, HASHTAG_TOP_SENTIMENT).in_stage(st)?;
    ctx.write_json(st, "hashtag_sentiment.json", &ranking)
}

#[derive(Serialize)]
struct Distributions {
    selected: Rubric,
    original: sentiment::Distribution,
    improved: sentiment::Distribution,
}

fn sentiment_stage(ctx: &mut Context) -> Result<(), PipelineError> {
    let st = Stage::Sentiment;
    let records = load_records(ctx, st)?;
    let scores: Vec<CompoundScores> = records.iter().map(|r| CompoundScores::from_triple(&r.sentiment)).collect();
    let bytes = art::csv_bytes(
        &["id", "compound", "improved", "category_original", "category_improved"],
        records.iter().zip(&scores).map(|(r, s)| {
            vec![r.id.clone(), num(s.compound), num(s.improved), s.category_original.to_string(), s.category_improved.to_string()]
        }),
    )
    .in_stage(st)?;
    ctx.write(st, "scored.csv", &bytes)?;
    let d = Distributions {
        selected: ctx.cfg.rubric,
        original: sentiment::distribution_of_categories(scores.iter().map(|s| s.category_original), Rubric::Original).in_stage(st)?,
        improved: sentiment::distribution_of_categories(scores.iter().map(|s| s.category_improved), Rubric::Improved).in_stage(st)?,
    };
    ctx.write_json(st, "distribution.json", &d)
}

fn series_stage(ctx: &mut Context) -> Result<(), PipelineError> {
    let st = Stage::Series;
    let mut records = load_records(ctx, st)?;
    let tagged = ctx.input(st, "tagged.csv")?;
    art::apply_tags(&mut records, &tagged).in_stage(st)?;
    chronos::assign_synthetic_timestamps(&mut records, &chronos::default_fashion_weights(), seeds::derive(ctx.cfg.seed, "chronos"));

    let mut rows = Vec::with_capacity(records.len());
    for r in &records {
        let w = r.week.expect("assigned above");
        let (y, iso) = w.iso();
        rows.push(vec![r.id.clone(), w.get().to_string(), format!("{y}-W{iso:02}"), w.start().to_string()]);
    }
    let bytes = art::csv_bytes(&["id", "week", "iso_week", "week_start"], rows).in_stage(st)?;
    ctx.write(st, "weeks.csv", &bytes)?;

    let rubric = ctx.cfg.rubric;
    let series: Vec<ThemeSeries> =
        ThemeId::ALL.par_iter().map(|&t| chronos::build_weekly_series(&records, t, rubric)).collect::<Result<_, _>>().in_stage(st)?;
    let bytes = art::write_series(&series).in_stage(st)?;
    ctx.write(st, "series.csv", &bytes)
}

fn load_series(ctx: &Context, st: Stage) -> Result<Vec<ThemeSeries>, PipelineError> {
    let p = ctx.input(st, "series.csv")?;
    let s = art::read_series(&p).in_stage(st)?;
    if s.is_empty() {
        return Err("series.csv has no rows").in_stage(st);
    }
    Ok(s)
}

fn decomposition_csv(d: &chronos::Decomposition) -> art::Result<Vec<u8>> {
    art::csv_bytes(
        &["week", "observed", "trend", "seasonal", "residual"],
        (0..d.observed.len()).map(|w| vec![w.to_string(), num(d.observed[w]), opt(d.trend[w]), num(d.seasonal[w]), opt(d.residual[w])]),
    )
}

/// Weekly mean sentiment with empty weeks set to the theme's overall mean.
fn filled_sentiment(s: &ThemeSeries) -> Option<Vec<f64>> {
    let seen: Vec<f64> = s.mean_sentiment.iter().flatten().copied().collect();
    if seen.is_empty() {
        return None;
    }
    let fill = seen.iter().sum::<f64>() / seen.len() as f64;
    Some(s.mean_sentiment.iter().map(|m| m.unwrap_or(fill)).collect())
}

fn decompose_stage(ctx: &mut Context) -> Result<(), PipelineError> {
    let st = Stage::Decompose;
    let series = load_series(ctx, st)?;
    for s in &series {
        let d = chronos::decompose_additive(&s.counts_f64(), chronos::DEFAULT_PERIOD).in_stage(st)?;
        let bytes = decomposition_csv(&d).in_stage(st)?;
        ctx.write(st, &format!("decomposition/{}.csv", s.theme), &bytes)?;
        if ctx.cfg.decompose_sentiment {
            if let Some(values) = filled_sentiment(s) {
                let d = chronos::decompose_additive(&values, chronos::DEFAULT_PERIOD).in_stage(st)?;
                let bytes = decomposition_csv(&d).in_stage(st)?;
                ctx.write(st, &format!("decomposition/{}_sentiment.csv", s.theme), &bytes)?;
            }
        }
    }
    Ok(())
}

fn trends_stage(ctx: &mut Context) -> Result<(), PipelineError> {
    let st = Stage::Trends;
    let series = load_series(ctx, st)?;
    let opts = TrendOptions { sparse_records: ctx.cfg.sparse_records };
    let reports: Vec<trends::TrendReport> =
        series.par_iter().map(|s| trends::classify_trend_with(s, &opts)).collect::<Result<_, _>>().in_stage(st)?;

    #[derive(Serialize)]
    struct Row<'a> {
        #[serde(flatten)]
        report: &'a trends::TrendReport,
        total_records: u64,
        label: String,
    }
    let rows: Vec<Row> =
        reports.iter().zip(&series).map(|(r, s)| Row { report: r, total_records: s.total(), label: r.summary() }).collect();
    ctx.write_json(st, "trends.json", &rows)?;
    ctx.output.trend_table = Some(trends::format_table(&reports));
    Ok(())
}

#[derive(Serialize)]
struct ThemeModel {
    theme: ThemeId,
    order: String,
    seasonal_search: bool,
    fit: forecast::ArimaFit,
}

#[derive(Serialize)]
struct ThemeForecast {
    theme: ThemeId,
    /// Weeks after the last observed week.
    weeks: Vec<usize>,
    forecast: forecast::Forecast,
    pct_of_peak: Option<Vec<f64>>,
    history_pct_of_peak: Option<Vec<f64>>,
}

fn forecast_stage(ctx: &mut Context) -> Result<(), PipelineError> {
    let st = Stage::Forecast;
    let series = load_series(ctx, st)?;
    let seasonal = &ctx.cfg.seasonal_themes;
    let results: Vec<(ThemeModel, ThemeForecast)> = series
        .par_iter()
        .map(|s| -> forecast::Result<_> {
            let history = s.counts_f64();
            let seasonal_search = seasonal.contains(&s.theme);
            let opts = if seasonal_search { GridOptions::seasonal() } else { GridOptions::default() };
            let fit = forecast::grid_search(&history, &opts)?;
            let fc = forecast::forecast(&fit, &history, HORIZON)?.floored();
            let pct = forecast::normalize_to_peak(&history, &fc.mean).ok();
            let hist_pct = forecast::normalize_to_peak(&history, &history).ok();
            Ok((
                ThemeModel { theme: s.theme, order: fit.spec.to_string(), seasonal_search, fit },
                ThemeForecast {
                    theme: s.theme,
                    weeks: (N_WEEKS..N_WEEKS + HORIZON).collect(),
                    forecast: fc,
                    pct_of_peak: pct,
                    history_pct_of_peak: hist_pct,
                },
            ))
        })
        .collect::<Result<_, _>>()
        .in_stage(st)?;

    let mut rows = Vec::new();
    let mut norm = Vec::new();
    for (_, f) in &results {
        for (h, &w) in f.weeks.iter().enumerate() {
            rows.push(vec![
                f.theme.to_string(),
                w.to_string(),
                num(f.forecast.mean[h]),
                num(f.forecast.lower95[h]),
                num(f.forecast.upper95[h]),
                opt(f.pct_of_peak.as_ref().map(|p| p[h])),
            ]);
        }
        if let (Some(hist), Some(pct)) = (&f.history_pct_of_peak, &f.pct_of_peak) {
            for (w, v) in hist.iter().enumerate() {
                norm.push(vec![f.theme.to_string(), w.to_string(), "history".into(), num(*v)]);
            }
            for (&w, v) in f.weeks.iter().zip(pct) {
                norm.push(vec![f.theme.to_string(), w.to_string(), "forecast".into(), num(*v)]);
            }
        }
    }
    let bytes = art::csv_bytes(&["theme", "week", "mean", "lower95", "upper95", "pct_of_peak"], rows).in_stage(st)?;
    ctx.write(st, "forecasts.csv", &bytes)?;
    let bytes = art::csv_bytes(&["theme", "week", "kind", "pct_of_peak"], norm).in_stage(st)?;
    ctx.write(st, "forecast_normalized.csv", &bytes)?;
    let (models, forecasts): (Vec<ThemeModel>, Vec<ThemeForecast>) = results.into_iter().unzip();
    ctx.write_json(st, "forecasts.json", &forecasts)?;
    ctx.write_json(st, "models.json", &models)
}

#[derive(Serialize)]
struct NetworkArtifact<'a> {
    differencing: BTreeMap<ThemeId, usize>,
    #[serde(flatten)]
    network: &'a CausalNetwork,
}

fn causality_stage(ctx: &mut Context) -> Result<(), PipelineError> {
    let st = Stage::Causality;
    let series = load_series(ctx, st)?;
    let stationary: Vec<(ThemeId, Vec<f64>, usize)> = series
        .par_iter()
        .map(|s| causality::stationarize(&s.counts_f64()).map(|(v, d)| (s.theme, v, d)))
        .collect::<Result<_, _>>()
        .in_stage(st)?;
    let themes: Vec<ThemeId> = stationary.iter().map(|(t, _, _)| *t).collect();
    let differencing = stationary.iter().map(|(t, _, d)| (*t, *d)).collect();
    let map: BTreeMap<ThemeId, Vec<f64>> = stationary.into_iter().map(|(t, v, _)| (t, v)).collect();
    let tested = causality::test_all_pairs(&themes, &map).in_stage(st)?;
    let network = CausalNetwork::from_edges(themes, &tested);
    ctx.write(st, "network.dot", causality::export_dot(&network).as_bytes())?;
    ctx.write_json(st, "network.json", &NetworkArtifact { differencing, network: &network })?;
    ctx.write(st, "causality_lags.csv", causality::lag_table_csv(&tested).as_bytes())
}

#[derive(Serialize)]
struct ClassifierReport {
    rubric: Rubric,
    k: usize,
    n_trees: usize,
    class_counts: BTreeMap<String, usize>,
    fold_sizes: Vec<usize>,
    vocabulary_size: usize,
    report: classify::EvalReport,
}

fn classify_stage(ctx: &mut Context) -> Result<(), PipelineError> {
    let st = Stage::Classify;
    let records = load_records(ctx, st)?;
    let rubric = ctx.cfg.rubric;
    let docs: Vec<&str> = records.iter().map(|r| r.clean_text.as_str()).collect();
    let labels: Vec<usize> = records.iter().map(|r| rubric.categorize(rubric.score(&r.sentiment)).polarity().index()).collect();
    let cfg = ForestConfig { n_trees: ctx.cfg.n_trees, ..ForestConfig::default() };
    let seed = seeds::derive(ctx.cfg.seed, "classify");
    let cv = classify::cross_validate(&docs, &labels, ctx.cfg.folds, &cfg, seed).in_stage(st)?;
    let model = TextClassifier::train(&docs, &labels, &cfg, seeds::derive(seed, "final")).in_stage(st)?;

    let names = classify::polarity_labels();
    let mut header = vec!["actual"];
    header.extend(names);
    let bytes = art::csv_bytes(
        &header,
        cv.report.confusion.iter().zip(names).map(|(row, name)| {
            let mut v = vec![name.to_owned()];
            v.extend(row.iter().map(|c| c.to_string()));
            v
        }),
    )
    .in_stage(st)?;
    ctx.write(st, "confusion.csv", &bytes)?;
    let report = ClassifierReport {
        rubric,
        k: cv.k,
        n_trees: cfg.n_trees,
        class_counts: names.iter().enumerate().map(|(c, n)| ((*n).to_owned(), labels.iter().filter(|&&l| l == c).count())).collect(),
        fold_sizes: cv.folds.iter().map(|f| f.test.len()).collect(),
        vocabulary_size: model.vocabulary.len(),
        report: cv.report,
    };
    ctx.write_json(st, "classifier_report.json", &report)?;
    let json = model.to_json().in_stage(st)?;
    ctx.write(st, "model.json", json.as_bytes())
}

fn read_platform_data(path: &Path) -> art::Result<Vec<PanelRecord>> {
    art::read_csv(path)?
        .iter()
        .map(|row| {
            let score = art::parse_f64(row, "score")?;
            if !(-1.0..=1.0).contains(&score) {
                return Err(format!("score {score} outside [-1, 1]").into());
            }
            Ok(PanelRecord { platform: art::field(row, "platform")?.parse()?, theme: art::field(row, "theme")?.parse()?, score })
        })
        .collect()
}

fn panels_stage(ctx: &mut Context) -> Result<(), PipelineError> {
    let st = Stage::Panels;
    let seed = seeds::derive(ctx.cfg.seed, "panels");
    let panel = match &ctx.cfg.platform_data {
        Some(p) => {
            existing(st, p)?;
            read_platform_data(p).in_stage(st)?
        }
        None => panels::generate_platform_panel(&panels::default_profiles(), ctx.cfg.panel_n, seed).in_stage(st)?,
    };
    let bytes = art::csv_bytes(
        &["platform", "theme", "score"],
        panel.iter().map(|r| vec![r.platform.to_string(), r.theme.to_string(), num(r.score)]),
    )
    .in_stage(st)?;
    ctx.write(st, "platform_panel.csv", &bytes)?;

    let heat = panels::platform_heatmap(&panel);
    let mut header = vec!["platform"];
    header.extend(heat.themes.iter().map(|t| t.as_str()));
    let bytes = art::csv_bytes(
        &header,
        heat.platforms.iter().zip(&heat.values).map(|(p, row): (&Platform, _)| {
            let mut v = vec![p.to_string()];
            v.extend(row.iter().map(|x| opt(*x)));
            v
        }),
    )
    .in_stage(st)?;
    ctx.write(st, "platform_heatmap.csv", &bytes)?;

    let lexicon = panels::BrandLexicon::default();
    let brands =
        panels::generate_brand_panel(&lexicon, ctx.cfg.brand_n, panels::DEFAULT_DISPERSION, seeds::derive(seed, "brands")).in_stage(st)?;
    let bytes = art::csv_bytes(
        &["brand", "category", "text", "score"],
        brands.iter().map(|r| vec![r.brand.clone(), r.category.to_string(), r.text.clone(), num(r.score)]),
    )
    .in_stage(st)?;
    ctx.write(st, "brand_panel.csv", &bytes)?;
    let summary = panels::brand_sentiment(brands.iter().map(|r| (r.text.as_str(), r.score)), &lexicon);
    ctx.write_json(st, "brand_sentiment.json", &summary)
}

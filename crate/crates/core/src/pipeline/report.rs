//! Summary JSON and one tidy CSV per figure family.

use std::collections::BTreeMap;
use std::path::Path;

use serde_json::{json, Value};

use super::artifacts::{self as art, num};
use super::stages::Context;
use super::{PipelineError, Stage, StageResult};
use crate::themes::ThemeId;

const ST: Stage = Stage::Report;
const HISTOGRAM_BINS: usize = 20;

fn read_json(path: &Path) -> art::Result<Value> {
    Ok(serde_json::from_slice(&std::fs::read(path)?)?)
}

fn optional(ctx: &Context, rel: &str) -> Option<std::path::PathBuf> {
    let p = ctx.path(rel);
    p.exists().then_some(p)
}

/// Counts of scores in `HISTOGRAM_BINS` equal bins over `[-1, 1]`.
fn histogram(values: &[f64]) -> Vec<usize> {
    let mut bins = vec![0usize; HISTOGRAM_BINS];
    for &v in values {
        let i = ((v + 1.0) / 2.0 * HISTOGRAM_BINS as f64).floor();
        bins[(i.max(0.0) as usize).min(HISTOGRAM_BINS - 1)] += 1;
    }
    bins
}

fn sentiment_histogram(ctx: &Context) -> Result<Vec<u8>, PipelineError> {
    let rows = art::read_csv(&ctx.input(ST, "scored.csv")?).in_stage(ST)?;
    let mut out = Vec::new();
    for (rubric, col) in [("original", "compound"), ("improved", "improved")] {
        let values: Vec<f64> = rows.iter().map(|r| art::parse_f64(r, col)).collect::<Result<_, _>>().in_stage(ST)?;
        for (i, c) in histogram(&values).into_iter().enumerate() {
            let lo = -1.0 + 2.0 * i as f64 / HISTOGRAM_BINS as f64;
            let hi = -1.0 + 2.0 * (i + 1) as f64 / HISTOGRAM_BINS as f64;
            out.push(vec![rubric.to_owned(), num(lo), num(hi), c.to_string()]);
        }
    }
    art::csv_bytes(&["rubric", "bin_lo", "bin_hi", "count"], out).in_stage(ST)
}

fn decomposition_long(ctx: &Context) -> Result<Vec<u8>, PipelineError> {
    let mut out = Vec::new();
    for t in ThemeId::ALL {
        let Some(p) = optional(ctx, &format!("decomposition/{t}.csv")) else {
            continue;
        };
        for row in art::read_csv(&p).in_stage(ST)? {
            let mut v = vec![t.to_string()];
            for c in ["week", "observed", "trend", "seasonal", "residual"] {
                v.push(art::field(&row, c).in_stage(ST)?.to_owned());
            }
            out.push(v);
        }
    }
    if out.is_empty() {
        return Err(PipelineError::MissingInput { stage: Some(ST), path: ctx.path("decomposition") });
    }
    art::csv_bytes(&["theme", "week", "observed", "trend", "seasonal", "residual"], out).in_stage(ST)
}

fn s(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => String::new(),
        other => other.to_string(),
    }
}

pub fn run(ctx: &mut Context) -> Result<(), PipelineError> {
    let join = read_json(&ctx.input(ST, "join_summary.json")?).in_stage(ST)?;
    let dist = read_json(&ctx.input(ST, "distribution.json")?).in_stage(ST)?;
    let trends = read_json(&ctx.input(ST, "trends.json")?).in_stage(ST)?;
    let models = read_json(&ctx.input(ST, "models.json")?).in_stage(ST)?;
    let network = read_json(&ctx.input(ST, "network.json")?).in_stage(ST)?;
    let counts: BTreeMap<String, u64> = art::read_csv(&ctx.input(ST, "theme_counts.csv")?)
        .in_stage(ST)?
        .iter()
        .map(|r| Ok((art::field(r, "theme")?.to_owned(), art::field(r, "count")?.parse()?)))
        .collect::<art::Result<_>>()
        .in_stage(ST)?;
    let normalized = std::fs::read(ctx.input(ST, "forecast_normalized.csv")?).in_stage(ST)?;
    let histogram = sentiment_histogram(ctx)?;
    let decomposition = decomposition_long(ctx)?;

    let selected = dist["selected"].as_str().unwrap_or("improved").to_owned();
    let empty = Vec::new();
    let trend_rows = trends.as_array().unwrap_or(&empty);
    let edges = network["edges"].as_array().unwrap_or(&empty);
    let mut summary = json!({
        "seed": ctx.cfg.seed,
        "rubric": selected,
        "records": join,
        "theme_counts": counts,
        "sentiment": {
            "five_class": dist[&selected]["five_class"],
            "three_class": dist[&selected]["three_class"],
        },
        "trends": trend_rows.iter().map(|t| json!({
            "theme": t["theme"],
            "label": t["label"],
            "slope": t["slope"],
            "p_value": t["p_value"],
            "r_squared": t["r_squared"],
        })).collect::<Vec<_>>(),
        "forecast_models": models.as_array().unwrap_or(&empty).iter().map(|m| json!({
            "theme": m["theme"],
            "order": m["order"],
            "aic": m["fit"]["aic"],
            "fallback": m["fit"]["fallback"],
        })).collect::<Vec<_>>(),
        "causality": {
            "edges": edges.iter().map(|e| json!({
                "source": e["source"],
                "target": e["target"],
                "strength": e["strength"],
                "min_p": e["min_p"],
                "bidirectional": e["bidirectional"],
            })).collect::<Vec<_>>(),
        },
    });

    let mut plots: Vec<(&str, Vec<u8>)> = vec![
        ("plots/sentiment_histogram.csv", histogram),
        ("plots/decomposition.csv", decomposition),
        ("plots/forecast_normalized.csv", normalized),
    ];
    let trend_csv = art::csv_bytes(
        &["theme", "slope", "p_value", "r_squared", "direction", "significant", "confidence"],
        trend_rows.iter().map(|t| {
            ["theme", "slope", "p_value", "r_squared", "direction", "significant", "confidence"].iter().map(|k| s(&t[*k])).collect()
        }),
    )
    .in_stage(ST)?;
    plots.push(("plots/trends.csv", trend_csv));
    let edge_csv = art::csv_bytes(
        &["source", "target", "strength", "min_p", "bidirectional"],
        edges.iter().map(|e| ["source", "target", "strength", "min_p", "bidirectional"].iter().map(|k| s(&e[*k])).collect()),
    )
    .in_stage(ST)?;
    plots.push(("plots/network_edges.csv", edge_csv));
    if let Some(p) = optional(ctx, "hashtags.csv") {
        plots.push(("plots/hashtags.csv", std::fs::read(p).in_stage(ST)?));
    }

    if let Some(p) = optional(ctx, "classifier_report.json") {
        let r = read_json(&p).in_stage(ST)?;
        summary["classifier"] = json!({
            "accuracy": r["report"]["accuracy"],
            "balanced_accuracy": r["report"]["balanced_accuracy"],
            "macro_f1": r["report"]["macro_f1"],
            "n": r["report"]["n"],
        });
        if let Some(c) = optional(ctx, "confusion.csv") {
            plots.push(("plots/confusion.csv", std::fs::read(c).in_stage(ST)?));
        }
    }
    if let Some(p) = optional(ctx, "platform_heatmap.csv") {
        let rows = art::read_csv(&p).in_stage(ST)?;
        summary["platform_heatmap"] = rows
            .iter()
            .map(|r| {
                let platform = r.get("platform").cloned().unwrap_or_default();
                let cells: BTreeMap<&String, Value> = r
                    .iter()
                    .filter(|(k, _)| *k != "platform")
                    .map(|(k, v)| (k, v.parse::<f64>().map_or(Value::Null, |x| json!(x))))
                    .collect();
                (platform, json!(cells))
            })
            .collect::<serde_json::Map<_, _>>()
            .into();
        plots.push(("plots/platform_heatmap.csv", std::fs::read(p).in_stage(ST)?));
    }
    if let Some(p) = optional(ctx, "brand_sentiment.json") {
        summary["brand_categories"] = read_json(&p).in_stage(ST)?["per_category"].clone();
    }
    if let Some(p) = optional(ctx, "brand_panel.csv") {
        let rows = art::read_csv(&p).in_stage(ST)?;
        let bytes = art::csv_bytes(
            &["brand", "category", "score"],
            rows.iter().map(|r| ["brand", "category", "score"].iter().map(|k| r.get(*k).cloned().unwrap_or_default()).collect()),
        )
        .in_stage(ST)?;
        plots.push(("plots/brand_scores.csv", bytes));
    }

    for (rel, bytes) in plots {
        ctx.write(ST, rel, &bytes)?;
    }
    ctx.write_json(ST, "summary.json", &summary)
}

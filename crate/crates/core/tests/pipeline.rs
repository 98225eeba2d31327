mod common;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::Path;

use common::*;
use fashion_trends::pipeline::{run_pipeline, PipelineError, RunConfig, Stage};

fn rows(path: &Path) -> Vec<BTreeMap<String, String>> {
    let mut rdr = csv::Reader::from_path(path).unwrap();
    let headers = rdr.headers().unwrap().clone();
    rdr.records().map(|r| headers.iter().map(str::to_owned).zip(r.unwrap().iter().map(str::to_owned)).collect()).collect()
}

fn f(row: &BTreeMap<String, String>, k: &str) -> f64 {
    row[k].parse().unwrap()
}

fn improved(pos: f64, neg: f64, neu: f64) -> f64 {
    let x = 2.0 * (pos - neg);
    let t = ((2.0 * x).exp() - 1.0) / ((2.0 * x).exp() + 1.0);
    t * (1.0 - 0.7 * neu)
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_slice(&std::fs::read(path).unwrap()).unwrap()
}

#[test]
fn bundle_matches_golden_and_ignores_job_count() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let c = tempfile::tempdir().unwrap();
    run_fixture(a.path(), 1);
    run_fixture(b.path(), 4);
    run_fixture(c.path(), 1);
    let m = manifest(a.path());
    assert_eq!(m, manifest(b.path()), "jobs=1 vs jobs=4");
    assert_eq!(m, manifest(c.path()), "repeat run");
    check_golden("bundle.sha256", &m).unwrap();
    for name in ["trends.json", "distribution.json", "forecast_normalized.csv", "summary.json"] {
        let text = std::fs::read_to_string(a.path().join(name)).unwrap();
        check_golden(name, &text).unwrap();
    }
}

#[test]
fn artifacts_agree_with_brute_force_recounts() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path();
    run_fixture(out, 2);

    // Inner join on ids, then the keyword filter, tallied directly.
    let texts = rows(&fixture("tweets.csv"));
    let scored_ids: BTreeSet<String> = rows(&fixture("t4sa.csv")).iter().map(|r| r["TWID"].clone()).collect();
    let joined = texts.iter().filter(|r| scored_ids.contains(&r["id"])).count();
    let summary = json(&out.join("join_summary.json"));
    assert_eq!(summary["join"]["kept"], joined);
    let records = rows(&out.join("records.csv"));
    assert_eq!(summary["filter"]["kept"], records.len());

    // Weekly counts and mean sentiment per theme.
    let weeks: HashMap<String, usize> =
        rows(&out.join("weeks.csv")).iter().map(|r| (r["id"].clone(), r["week"].parse().unwrap())).collect();
    let tags: HashMap<String, String> = rows(&out.join("tagged.csv")).iter().map(|r| (r["id"].clone(), r["themes"].clone())).collect();
    let mut counts: BTreeMap<(String, usize), (u32, f64)> = BTreeMap::new();
    for r in &records {
        let s = improved(f(r, "pos"), f(r, "neg"), f(r, "neu"));
        for theme in tags[&r["id"]].split(';').filter(|t| !t.is_empty()) {
            let e = counts.entry((theme.to_owned(), weeks[&r["id"]])).or_default();
            e.0 += 1;
            e.1 += s;
        }
    }
    let series = rows(&out.join("series.csv"));
    assert_eq!(series.len(), 7 * 104);
    for row in &series {
        let key = (row["theme"].clone(), row["week"].parse().unwrap());
        let (n, sum) = counts.get(&key).copied().unwrap_or_default();
        assert_eq!(row["count"].parse::<u32>().unwrap(), n, "{key:?}");
        if n > 0 {
            assert!((f(row, "mean_sentiment") - sum / f64::from(n)).abs() < 1e-12);
        } else {
            assert!(row["mean_sentiment"].is_empty());
        }
    }

    // Five-class fractions under the improved rubric.
    let mut tally: BTreeMap<&str, usize> = BTreeMap::new();
    for r in &records {
        let c = improved(f(r, "pos"), f(r, "neg"), f(r, "neu"));
        let cat = match c {
            c if c >= 0.5 => "very_positive",
            c if c >= 0.15 => "positive",
            c if c > -0.15 => "neutral",
            c if c > -0.5 => "negative",
            _ => "very_negative",
        };
        *tally.entry(cat).or_default() += 1;
    }
    let dist = json(&out.join("distribution.json"));
    for (cat, n) in tally {
        let want = n as f64 / records.len() as f64;
        assert!((dist["improved"]["five_class"][cat].as_f64().unwrap() - want).abs() < 1e-12);
    }

    // Decomposition recomposes and observes the series.
    for theme in ["vintage", "seasonal", "minimalist"] {
        let d = rows(&out.join(format!("decomposition/{theme}.csv")));
        assert_eq!(d.len(), 104);
        for (w, row) in d.iter().enumerate() {
            let obs = f(row, "observed");
            let count = counts.get(&(theme.to_owned(), w)).map_or(0, |c| c.0);
            assert_eq!(obs, f64::from(count));
            if !row["trend"].is_empty() {
                assert!((f(row, "trend") + f(row, "seasonal") + f(row, "residual") - obs).abs() < 1e-9);
            } else {
                assert!(!(6..98).contains(&w));
            }
        }
    }

    // Percent-of-peak recomputed from the forecast means and series maxima.
    let mut peak: BTreeMap<String, f64> = BTreeMap::new();
    for row in &series {
        let e = peak.entry(row["theme"].clone()).or_insert(0.0);
        *e = e.max(f(row, "count"));
    }
    let fc = rows(&out.join("forecasts.csv"));
    assert_eq!(fc.len(), 7 * 12);
    for row in &fc {
        let want = 100.0 * f(row, "mean") / peak[&row["theme"]];
        assert!((f(row, "pct_of_peak") - want).abs() < 1e-9);
        assert!(f(row, "lower95") <= f(row, "mean") && f(row, "mean") <= f(row, "upper95"));
        assert!(f(row, "mean") >= 0.0);
    }

    // Confusion matrix: labelled 3x3 over every record.
    let conf = rows(&out.join("confusion.csv"));
    assert_eq!(conf.iter().map(|r| r["actual"].as_str()).collect::<Vec<_>>(), ["negative", "neutral", "positive"]);
    let total: usize = conf.iter().flat_map(|r| ["negative", "neutral", "positive"].map(|k| r[k].parse::<usize>().unwrap())).sum();
    assert_eq!(total, records.len());

    // Heatmap: 5 platforms by 7 themes, each the mean of its panel cell.
    let panel = rows(&out.join("platform_panel.csv"));
    let heat = rows(&out.join("platform_heatmap.csv"));
    assert_eq!(heat.len(), 5);
    for row in &heat {
        assert_eq!(row.len(), 8);
        for theme in ["vintage", "luxury", "accessories", "seasonal", "sustainability", "streetwear", "minimalist"] {
            let cell: Vec<f64> =
                panel.iter().filter(|p| p["platform"] == row["platform"] && p["theme"] == theme).map(|p| f(p, "score")).collect();
            let mean = cell.iter().sum::<f64>() / cell.len() as f64;
            assert!((f(row, theme) - mean).abs() < 1e-12);
        }
    }

    // The DOT file lists every edge in the network JSON.
    let dot = std::fs::read_to_string(out.join("network.dot")).unwrap();
    let net = json(&out.join("network.json"));
    for e in net["edges"].as_array().unwrap() {
        let line = format!("\"{}\" -> \"{}\"", e["source"].as_str().unwrap(), e["target"].as_str().unwrap());
        assert!(dot.contains(&line), "{line}");
    }
}

#[test]
fn trends_stage_alone_rewrites_only_trends() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path();
    run_fixture(out, 1);
    let before = manifest(out);
    let original = std::fs::read(out.join("trends.json")).unwrap();
    std::fs::write(out.join("trends.json"), "stale").unwrap();
    let cfg = RunConfig { stages: vec![Stage::Trends], ..fixture_config(out, 1) };
    let run = run_pipeline(&cfg).unwrap();
    assert_eq!(run.stages, vec![Stage::Trends]);
    assert_eq!(run.artifacts, vec![Path::new("trends.json").to_owned()]);
    assert!(run.trend_table.unwrap().starts_with("theme"));
    assert_eq!(std::fs::read(out.join("trends.json")).unwrap(), original);
    assert_eq!(manifest(out), before);
}

#[test]
fn missing_corpus_names_the_path() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = RunConfig { input: Some(dir.path().join("nope.csv")), ..fixture_config(dir.path(), 1) };
    let err = run_pipeline(&cfg).unwrap_err();
    assert_eq!(err.exit_code(), 2);
    assert!(err.to_string().contains("nope.csv"), "{err}");
}

#[test]
fn missing_upstream_artifact() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = RunConfig { stages: vec![Stage::Forecast], ..fixture_config(dir.path(), 1) };
    match run_pipeline(&cfg).unwrap_err() {
        PipelineError::MissingInput { stage, path } => {
            assert_eq!(stage, Some(Stage::Forecast));
            assert!(path.ends_with("series.csv"));
        }
        other => panic!("{other}"),
    }
}

#[test]
fn stage_failure_is_named() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = RunConfig { stages: vec![Stage::Ingest, Stage::Classify], folds: 400, ..fixture_config(dir.path(), 1) };
    let err = run_pipeline(&cfg).unwrap_err();
    assert_eq!(err.exit_code(), 1);
    assert!(err.to_string().starts_with("stage classify:"), "{err}");
    cfg.folds = 1;
    assert_eq!(run_pipeline(&cfg).unwrap_err().exit_code(), 2);
}

#[test]
fn original_rubric_changes_scores_not_counts() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let stages = vec![Stage::Ingest, Stage::Themes, Stage::Series];
    run_pipeline(&RunConfig { stages: stages.clone(), ..fixture_config(a.path(), 1) }).unwrap();
    run_pipeline(&RunConfig { stages, rubric: "original".parse().unwrap(), ..fixture_config(b.path(), 1) }).unwrap();
    let sa = rows(&a.path().join("series.csv"));
    let sb = rows(&b.path().join("series.csv"));
    assert!(sa.iter().zip(&sb).all(|(x, y)| x["count"] == y["count"]));
    assert!(sa.iter().zip(&sb).any(|(x, y)| x["mean_sentiment"] != y["mean_sentiment"]));
}

//! Acceptance suite: one PASS/FAIL line per criterion with its runtime.
//!
//! ```text
//! cargo test -p fashion-trends --test acceptance
//! cargo test -p fashion-trends --test acceptance -- 7   # only criterion 7
//! ```

mod common;

use std::collections::BTreeMap;
use std::panic::{self, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use fashion_trends::causality::{classify_pair, classify_strength, granger_p, Strength};
use fashion_trends::chronos::decompose_additive;
use fashion_trends::classify::{balanced_accuracy_from_recalls, cross_validate, ForestConfig};
use fashion_trends::forecast::{fit_arima, forecast, grid_search, ArimaSpec, GridOptions};
use fashion_trends::panels::{self, BrandCategory, BrandLexicon, Platform};
use fashion_trends::sentiment::{categorize_improved, categorize_original, compound, improved_compound};
use fashion_trends::statcore::{adf_test, ols_line, DEFAULT_MAX_LAG};
use fashion_trends::trends::{label, Confidence, Direction};
use fashion_trends::{seeds, sim, SentimentCategory, ThemeId};
use rand::Rng;

type Outcome = Result<String, String>;

struct Criterion {
    id: u32,
    name: &'static str,
    bound: Duration,
    run: fn() -> Outcome,
}

const ROOT: u64 = 0x005E_EDAC;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        let ok: bool = $cond;
        if !ok {
            return Err(format!($($msg)+));
        }
    };
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

// exp by its power series, so the oracle shares no code with libm's tanh.
fn series_exp(x: f64) -> f64 {
    let (mut term, mut sum) = (1.0f64, 1.0f64);
    for k in 1..80 {
        term *= x / k as f64;
        sum += term;
    }
    sum
}

fn oracle_tanh(x: f64) -> f64 {
    let e = series_exp(2.0 * x.abs());
    let t = (e - 1.0) / (e + 1.0);
    t.copysign(x)
}

fn sentiment_formulas() -> Outcome {
    let mut rng = seeds::rng(seeds::derive(ROOT, "triples"));
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let (pos, neg): (f64, f64) = (rng.random(), rng.random());
        let neu: f64 = rng.random();
        let c = (pos - neg) / (pos + neg + 0.001);
        let i = oracle_tanh(2.0 * (pos - neg)) * (1.0 - 0.7 * neu);
        worst = worst.max((compound(pos, neg) - c).abs()).max((improved_compound(pos, neg, neu) - i).abs());
    }
    ensure!(worst <= 1e-9, "max deviation from oracle {worst:e}");

    let tanh2 = oracle_tanh(2.0);
    let tagged = [
        (compound(1.0, 0.0), 0.999_001),
        (compound(0.0, 0.0), 0.0),
        (compound(0.3, 0.3), 0.0),
        (improved_compound(0.5, 0.5, 0.4), 0.0),
        (improved_compound(1.0, 0.0, 0.0), tanh2),
        (improved_compound(1.0, 0.0, 1.0), 0.3 * tanh2),
    ];
    for (i, (got, want)) in tagged.iter().enumerate() {
        ensure!(close(*got, *want, 1e-9), "tagged compound case {i}: {got} vs {want}");
    }
    ensure!(close(tanh2, 0.964_027_580_075_8, 1e-12), "oracle tanh(2) = {tanh2}");

    use SentimentCategory::*;
    let boundaries = [
        (categorize_original(0.5), VeryPositive),
        (categorize_original(0.05), Positive),
        (categorize_original(-0.5), VeryNegative),
        (categorize_improved(0.15), Positive),
        (categorize_improved(0.149_999), Neutral),
        (categorize_improved(-0.2), Negative),
    ];
    for (i, (got, want)) in boundaries.iter().enumerate() {
        ensure!(got == want, "boundary case {i}: {got:?} vs {want:?}");
    }
    Ok(format!("50 triples max dev {worst:.1e}; 6 tagged values; 6 boundaries"))
}

fn trend_rows() -> Outcome {
    use Confidence::*;
    use Direction::*;
    let rows = [
        ("accessories", 1.0, 0.0013, 0.126, SlightlyRising, true, High),
        ("streetwear", 1.0, 0.0321, 0.057, SlightlyRising, true, Medium),
        ("vintage", 1.0, 0.7148, 0.002, Stable, false, Low),
        ("minimalist", -1.0, 0.0112, 0.080, SlightlyFalling, true, Medium),
        ("sustainability", -1.0, 0.0002, 0.163, SlightlyFalling, true, High),
        ("seasonal", -1.0, 0.0003, 0.157, SlightlyFalling, true, High),
        ("luxury", -1.0, 0.0037, 0.101, SlightlyFalling, true, High),
    ];
    for (theme, sign, p, r2, dir, sig, conf) in rows {
        let got = label(sign * 0.01, p, r2);
        ensure!(got == (dir, sig, conf), "{theme}: {got:?} vs {:?}", (dir, sig, conf));
    }
    Ok("7/7 rows".into())
}

fn causality_rows() -> Outcome {
    let rows: [(f64, &[usize], Strength); 8] = [
        (2.1e-5, &[2, 3, 4], Strength::VeryStrong),
        (4.1e-4, &[1, 2, 3, 4], Strength::VeryStrong),
        (6.1e-4, &[1, 2, 3, 4], Strength::VeryStrong),
        (7.8e-4, &[1, 2, 3, 4], Strength::VeryStrong),
        (7.9e-4, &[1, 2, 3, 4], Strength::VeryStrong),
        (1.7e-2, &[1, 3], Strength::Strong),
        (2.5e-2, &[3, 4], Strength::Strong),
        // A single significant lag is weak, even at a small p.
        (4.8e-2, &[3], Strength::Weak),
    ];
    for (p, lags, want) in rows {
        let got = classify_strength(p, lags.len());
        ensure!(got == want, "min_p {p}: {got:?} vs {want:?}");
    }
    Ok("8/8 rows, single-lag row weak".into())
}

fn balanced_accuracy() -> Outcome {
    let b = balanced_accuracy_from_recalls(&[0.53, 0.97, 0.85]);
    ensure!(close(b, 0.7833, 0.0005), "balanced accuracy {b}");
    Ok(format!("{b:.4}"))
}

fn decomposition() -> Outcome {
    let mut worst = 0.0f64;
    for i in 0..100 {
        let y: Vec<f64> = sim::white_noise(seeds::derive_indexed(ROOT, "decomp", i), 104).iter().map(|v| 50.0 + 10.0 * v).collect();
        let d = decompose_additive(&y, 13).map_err(|e| e.to_string())?;
        for (t, obs) in y.iter().enumerate() {
            if let (Some(tr), Some(r)) = (d.trend[t], d.residual[t]) {
                worst = worst.max((tr + d.seasonal[t] + r - obs).abs());
            }
        }
    }
    ensure!(worst <= 1e-9, "recomposition error {worst:e}");

    for (name, y) in [("constant", vec![7.0; 104]), ("linear", (0..104).map(|t| 3.0 + 0.25 * t as f64).collect::<Vec<_>>())] {
        let d = decompose_additive(&y, 13).map_err(|e| e.to_string())?;
        let s = d.seasonal.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let r = d.residual.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
        ensure!(s <= 1e-9 && r <= 1e-9, "{name}: seasonal {s:e}, residual {r:e}");
    }

    let wave: Vec<f64> = (0..104).map(|t| (2.0 * std::f64::consts::PI * t as f64 / 13.0).sin()).collect();
    let noise = sim::white_noise(seeds::derive(ROOT, "sinusoid"), 104);
    let y: Vec<f64> = (0..104).map(|t| 20.0 + 0.05 * t as f64 + 3.0 * wave[t] + 0.3 * noise[t]).collect();
    let d = decompose_additive(&y, 13).map_err(|e| e.to_string())?;
    let r = correlation(&d.seasonal, &wave);
    ensure!(r > 0.99, "sinusoid correlation {r}");
    Ok(format!("max recomposition error {worst:.1e}; sinusoid r = {r:.4}"))
}

fn correlation(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let (ma, mb) = (a.iter().sum::<f64>() / n, b.iter().sum::<f64>() / n);
    let cov: f64 = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum();
    let va: f64 = a.iter().map(|x| (x - ma).powi(2)).sum();
    let vb: f64 = b.iter().map(|y| (y - mb).powi(2)).sum();
    cov / (va * vb).sqrt()
}

fn calibration() -> Outcome {
    const TRIALS: u64 = 1000;
    let x: Vec<f64> = (0..104).map(|t| t as f64).collect();
    let mut ols_hits = 0;
    let mut granger_hits = 0;
    for i in 0..TRIALS {
        let y = sim::white_noise(seeds::derive_indexed(ROOT, "ols", i), 104);
        if ols_line(&x, &y).map_err(|e| e.to_string())?.p_value < 0.05 {
            ols_hits += 1;
        }
        let a = sim::white_noise(seeds::derive_indexed(ROOT, "granger_x", i), 104);
        let b = sim::white_noise(seeds::derive_indexed(ROOT, "granger_y", i), 104);
        if granger_p(&a, &b, 2).map_err(|e| e.to_string())? < 0.05 {
            granger_hits += 1;
        }
    }
    let ols_rate = ols_hits as f64 / TRIALS as f64;
    let granger_rate = granger_hits as f64 / TRIALS as f64;
    let ok = |r: f64| (0.035..=0.065).contains(&r);
    ensure!(ok(ols_rate), "OLS false-positive rate {ols_rate}");
    ensure!(ok(granger_rate), "Granger false-positive rate {granger_rate}");

    let mut stationary = 0;
    let mut walks = 0;
    for i in 0..50 {
        let wn = sim::white_noise(seeds::derive_indexed(ROOT, "adf_wn", i), 200);
        if adf_test(&wn, DEFAULT_MAX_LAG).map_err(|e| e.to_string())?.is_stationary {
            stationary += 1;
        }
        let rw = sim::random_walk(seeds::derive_indexed(ROOT, "adf_rw", i), 200);
        if !adf_test(&rw, DEFAULT_MAX_LAG).map_err(|e| e.to_string())?.is_stationary {
            walks += 1;
        }
    }
    ensure!(stationary >= 45, "ADF: {stationary}/50 white-noise series stationary");
    ensure!(walks >= 45, "ADF: {walks}/50 random walks non-stationary");
    Ok(format!("OLS {:.1}%, Granger {:.1}%; ADF {stationary}/50 and {walks}/50", 100.0 * ols_rate, 100.0 * granger_rate))
}

fn arima() -> Outcome {
    let ar = sim::arma(seeds::derive(ROOT, "ar1"), 300, &[0.7], &[], 0.0, 1.0);
    let phi = fit_arima(&ar, &ArimaSpec::new(1, 0, 0)).map_err(|e| e.to_string())?.ar[0];
    ensure!(close(phi, 0.7, 0.1), "AR(1) estimate {phi}");
    let ma = sim::arma(seeds::derive(ROOT, "ma1"), 300, &[], &[0.5], 0.0, 1.0);
    let theta = fit_arima(&ma, &ArimaSpec::new(0, 0, 1)).map_err(|e| e.to_string())?.ma[0];
    ensure!(close(theta, 0.5, 0.12), "MA(1) estimate {theta}");

    use rayon::prelude::*;
    const RUNS: u64 = 500;
    const H: usize = 12;
    let covered: Result<Vec<usize>, String> = (0..RUNS)
        .into_par_iter()
        .map(|i| {
            let y = sim::arma(seeds::derive_indexed(ROOT, "coverage", i), 300 + H, &[0.7], &[], 0.0, 1.0);
            let fit = fit_arima(&y[..300], &ArimaSpec::new(1, 0, 0)).map_err(|e| e.to_string())?;
            let f = forecast(&fit, &y[..300], H).map_err(|e| e.to_string())?;
            Ok((0..H).filter(|&h| f.lower95[h] <= y[300 + h] && y[300 + h] <= f.upper95[h]).count())
        })
        .collect();
    let coverage = covered?.iter().sum::<usize>() as f64 / (RUNS as usize * H) as f64;
    ensure!((0.92..=0.98).contains(&coverage), "95% band coverage {coverage}");

    let noise = sim::arma(seeds::derive(ROOT, "trend"), 104, &[0.5], &[], 0.0, 1.0);
    let trending: Vec<f64> = noise.iter().enumerate().map(|(t, v)| 10.0 + 0.4 * t as f64 + v).collect();
    let fit = grid_search(&trending, &GridOptions::default()).map_err(|e| e.to_string())?;
    ensure!(fit.spec.d >= 1, "trending series chose d = {}", fit.spec.d);
    Ok(format!("phi {phi:.3}, theta {theta:.3}, coverage {:.1}%, d = {}", 100.0 * coverage, fit.spec.d))
}

fn directionality() -> Outcome {
    let mut detected = 0;
    let mut clean = 0;
    let mut both = 0;
    for i in 0..50 {
        let x = sim::white_noise(seeds::derive_indexed(ROOT, "cause", i), 104);
        let e = sim::white_noise(seeds::derive_indexed(ROOT, "effect", i), 104);
        let y: Vec<f64> = (0..104).map(|t| if t == 0 { e[0] } else { 0.9 * x[t - 1] + e[t] }).collect();
        let fwd = classify_pair(ThemeId::Streetwear, ThemeId::Vintage, &x, &y, 4).map_err(|e| e.to_string())?;
        let rev = classify_pair(ThemeId::Vintage, ThemeId::Streetwear, &y, &x, 4).map_err(|e| e.to_string())?;
        let f = fwd.strength != Strength::None;
        let r = rev.strength == Strength::None;
        detected += usize::from(f);
        clean += usize::from(r);
        both += usize::from(f && r);
    }
    ensure!(both >= 45, "x->y without y->x in {both}/50 seeds (x->y {detected}/50, y->x absent {clean}/50)");
    Ok(format!("{both}/50 seeds (x->y {detected}/50, y->x absent {clean}/50)"))
}

fn classifier() -> Outcome {
    const VOCAB: [&[&str]; 3] = [
        &["awful", "hate", "ruined", "ugly", "worst", "disappointed"],
        &["today", "store", "update", "announced", "available", "listed"],
        &["love", "gorgeous", "stunning", "perfect", "obsessed", "amazing"],
    ];
    const SHARED: &[&str] = &["the", "new", "dress", "look", "outfit", "my", "week", "collection"];
    let mut rng = seeds::rng(seeds::derive(ROOT, "corpus"));
    let mut docs = Vec::new();
    let mut labels = Vec::new();
    for _ in 0..1000 {
        let u: f64 = rng.random();
        let class = if u < 0.058 {
            0
        } else if u < 0.058 + 0.206 {
            2
        } else {
            1
        };
        let mut words = Vec::new();
        for _ in 0..2 {
            words.push(VOCAB[class][rng.random_range(0..VOCAB[class].len())]);
        }
        for _ in 0..rng.random_range(2..5) {
            words.push(SHARED[rng.random_range(0..SHARED.len())]);
        }
        docs.push(words.join(" "));
        labels.push(class);
    }
    let cv = cross_validate(&docs, &labels, 5, &ForestConfig::default(), seeds::derive(ROOT, "cv")).map_err(|e| e.to_string())?;
    let b = cv.report.balanced_accuracy;
    ensure!(b >= 0.90, "pooled balanced accuracy {b}");

    let mut spread = 0usize;
    for class in 0..3 {
        let per_fold: Vec<usize> = cv.folds.iter().map(|f| f.test.iter().filter(|&&i| labels[i] == class).count()).collect();
        let (lo, hi) = (per_fold.iter().min().unwrap(), per_fold.iter().max().unwrap());
        spread = spread.max(hi - lo);
    }
    ensure!(spread <= 1, "per-class fold sizes differ by {spread}");
    let counts: BTreeMap<usize, usize> = labels.iter().fold(BTreeMap::new(), |mut m, &y| {
        *m.entry(y).or_default() += 1;
        m
    });
    Ok(format!("balanced accuracy {b:.3}; class counts {counts:?}; per-class fold spread {spread}"))
}

fn panel_targets() -> Outcome {
    let records =
        panels::generate_platform_panel(&panels::default_profiles(), 1000, seeds::derive(ROOT, "panel")).map_err(|e| e.to_string())?;
    let heat = panels::platform_heatmap(&records);
    let cells = [(Platform::Pinterest, ThemeId::Minimalist, 0.91), (Platform::Reddit, ThemeId::Luxury, 0.17)];
    let mut detail = Vec::new();
    for (p, t, want) in cells {
        let got = heat.get(p, t).ok_or_else(|| format!("no {p:?}/{t:?} cell"))?;
        ensure!(close(got, want, 0.03), "{p:?}/{t:?} mean {got}");
        detail.push(format!("{}/{t} {got:.3}", p.as_str()));
    }

    let lexicon = BrandLexicon::default();
    let posts = panels::generate_brand_panel(&lexicon, 1000, panels::DEFAULT_DISPERSION, seeds::derive(ROOT, "brands"))
        .map_err(|e| e.to_string())?;
    let summary = panels::brand_sentiment(posts.iter().map(|r| (r.text.as_str(), r.score)), &lexicon);
    let order = [
        (BrandCategory::Sustainable, 0.76),
        (BrandCategory::Sportswear, 0.69),
        (BrandCategory::Luxury, 0.62),
        (BrandCategory::FastFashion, 0.46),
    ];
    let mut prev = f64::INFINITY;
    for (c, want) in order {
        let got = summary.per_category.get(&c).copied().ok_or_else(|| format!("no {c:?} mean"))?;
        ensure!(close(got, want, 0.03), "{c:?} mean {got}");
        ensure!(got < prev, "{c:?} out of order");
        prev = got;
        detail.push(format!("{c:?} {got:.3}"));
    }
    Ok(detail.join(", "))
}

fn determinism() -> Outcome {
    let dirs: Vec<tempfile::TempDir> = (0..3).map(|_| tempfile::tempdir()).collect::<Result<_, _>>().map_err(|e| e.to_string())?;
    common::run_fixture(dirs[0].path(), 1);
    common::run_fixture(dirs[1].path(), 1);
    common::run_fixture(dirs[2].path(), 4);
    let m: Vec<String> = dirs.iter().map(|d| common::manifest(d.path())).collect();
    ensure!(m[0] == m[1], "two runs differ");
    ensure!(m[0] == m[2], "jobs 1 and jobs 4 differ");
    common::check_golden("bundle.sha256", &m[0])?;
    Ok(format!("{} files identical across runs and job counts; golden matches", m[0].lines().count()))
}

fn criteria() -> Vec<Criterion> {
    let s = Duration::from_secs;
    vec![
        Criterion { id: 1, name: "compound formulas and boundaries", bound: s(1), run: sentiment_formulas },
        Criterion { id: 2, name: "trend rubric replay", bound: s(1), run: trend_rows },
        Criterion { id: 3, name: "causality rubric replay", bound: s(1), run: causality_rows },
        Criterion { id: 4, name: "balanced accuracy identity", bound: s(1), run: balanced_accuracy },
        Criterion { id: 5, name: "decomposition properties", bound: s(5), run: decomposition },
        Criterion { id: 6, name: "statistical calibration", bound: s(60), run: calibration },
        Criterion { id: 7, name: "ARIMA recovery and coverage", bound: s(120), run: arima },
        Criterion { id: 8, name: "causality directionality", bound: s(30), run: directionality },
        Criterion { id: 9, name: "classifier sanity", bound: s(60), run: classifier },
        Criterion { id: 10, name: "panel targets", bound: s(5), run: panel_targets },
        Criterion { id: 11, name: "end-to-end determinism", bound: s(60), run: determinism },
    ]
}

fn main() -> ExitCode {
    let filters: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    let mut ran = 0;
    for c in criteria() {
        if !filters.is_empty() && !filters.iter().any(|f| *f == c.id.to_string() || c.name.contains(f.as_str())) {
            continue;
        }
        ran += 1;
        let start = Instant::now();
        let result = panic::catch_unwind(AssertUnwindSafe(c.run)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| (*s).to_owned()))
                .unwrap_or_else(|| "panic".into());
            Err(format!("panicked: {msg}"))
        });
        let elapsed = start.elapsed();
        let (pass, detail) = match result {
            Ok(d) if elapsed <= c.bound => (true, d),
            Ok(d) => (false, format!("{d}; over time bound")),
            Err(e) => (false, e),
        };
        failed += usize::from(!pass);
        println!(
            "criterion {:>2} {}: {} ({:.2}s, bound {}s) {}",
            c.id,
            c.name,
            if pass { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64(),
            c.bound.as_secs(),
            detail
        );
    }
    println!("{} of {ran} criteria passed", ran - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

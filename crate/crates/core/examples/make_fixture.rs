//! Writes the small synthetic corpus used by the end-to-end tests.
//!
//! ```text
//! cargo run -p fashion-trends --example make_fixture -- fixtures
//! ```
//!
//! Produces `tweets.csv` (`id,text`) and `t4sa.csv` (`TWID,NEG,NEU,POS`).
//! A few texts have no score row and a few score rows have no text, so the
//! join drops both kinds; about one text in ten has no fashion keyword.

use std::path::PathBuf;

use fashion_trends::seeds;
use fashion_trends::sentiment::{Polarity, Rubric};
use rand::seq::IndexedRandom;
use rand::Rng;

const N_TWEETS: usize = 500;
const N_UNSCORED: usize = 10;
const N_ORPHAN_SCORES: usize = 15;
const SEED: u64 = 2024;

const FASHION: &[&str] = &["fashion", "style", "outfit", "dress", "ootd", "wardrobe", "denim", "chic", "runway", "clothing"];
const THEME_WORDS: &[&[&str]] = &[
    &["vintage", "retro", "thrift", "secondhand", "y2k"],
    &["luxury", "designer", "couture", "premium"],
    &["accessories", "jewelry", "handbag", "bag", "shoes"],
    &["summer", "winter", "spring", "autumn", "holiday"],
    &["sustainable", "ethical", "organic", "recycled", "ecofriendly"],
    &["streetwear", "sneakers", "hoodie", "urban", "skate"],
    &["minimalist", "minimal", "capsule", "simple"],
];
const OFF_TOPIC: &[&str] = &["traffic", "coffee", "football", "homework", "weather", "meeting", "pizza", "concert"];
const NEGATIVE: &[&str] = &["hate", "awful", "disappointed", "ruined", "worst", "cheap looking"];
const NEUTRAL: &[&str] = &["new", "today", "seen at", "shop", "week", "update"];
const POSITIVE: &[&str] = &["love", "gorgeous", "obsessed", "perfect", "amazing", "stunning"];
const FILLER: &[&str] = &["my", "the", "this", "look", "for", "with", "and", "collection", "drop", "store"];
const MENTIONS: &[&str] = &["@stylist", "@bestie", "@brand_official"];

fn polarity(rng: &mut seeds::Rng) -> Polarity {
    let u: f64 = rng.random();
    if u < 0.058 {
        Polarity::Negative
    } else if u < 0.058 + 0.206 {
        Polarity::Positive
    } else {
        Polarity::Neutral
    }
}

/// A `(neg, neu, pos)` triple whose improved-rubric class is `target`.
fn triple(rng: &mut seeds::Rng, target: Polarity) -> (f64, f64, f64) {
    loop {
        let (a, b) = (rng.random_range(0.0..1.0f64), rng.random_range(0.0..1.0f64));
        let (neg, pos) = match target {
            Polarity::Negative => (0.5 + 0.5 * a, 0.0),
            Polarity::Positive => (0.0, 0.45 + 0.55 * a),
            Polarity::Neutral => (0.1 * a, 0.1 * b),
        };
        let round = |x: f64| (x * 1e4).round() / 1e4;
        let (neg, pos) = (round(neg), round(pos));
        let neu = round(1.0 - neg - pos);
        let t = fashion_trends::SentimentTriple { pos, neg, neu };
        let r = Rubric::Improved;
        if r.categorize(r.score(&t)).polarity() == target {
            return (neg, neu, pos);
        }
    }
}

fn text(rng: &mut seeds::Rng, class: Polarity, fashion: bool) -> String {
    let mut words: Vec<String> = Vec::new();
    let tone = match class {
        Polarity::Negative => NEGATIVE,
        Polarity::Neutral => NEUTRAL,
        Polarity::Positive => POSITIVE,
    };
    // One in five texts borrows its tone word from another class.
    let tone = if rng.random_bool(0.2) { [NEGATIVE, NEUTRAL, POSITIVE].choose(rng).unwrap() } else { tone };
    words.push(tone.choose(rng).unwrap().to_string());
    for _ in 0..rng.random_range(2..5) {
        words.push(FILLER.choose(rng).unwrap().to_string());
    }
    if fashion {
        words.push(FASHION.choose(rng).unwrap().to_string());
        for _ in 0..rng.random_range(1..3) {
            let theme = THEME_WORDS.choose(rng).unwrap();
            words.push(theme.choose(rng).unwrap().to_string());
        }
    } else {
        words.push(OFF_TOPIC.choose(rng).unwrap().to_string());
    }
    if rng.random_bool(0.3) {
        words.insert(0, MENTIONS.choose(rng).unwrap().to_string());
    }
    if rng.random_bool(0.5) {
        let tag = if fashion { THEME_WORDS.choose(rng).unwrap().choose(rng).unwrap() } else { "mood" };
        words.push(format!("#{tag}"));
    }
    if fashion && rng.random_bool(0.4) {
        words.push("#OOTD".into());
    }
    if rng.random_bool(0.15) {
        words.push("https://t.co/x1y2z3".into());
    }
    let mut s = words.join(" ");
    if let Some(first) = s.get(..1) {
        s = first.to_uppercase() + &s[1..];
    }
    s
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "fixtures".into()));
    std::fs::create_dir_all(&dir)?;
    let mut rng = seeds::rng(SEED);
    let mut tweets = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_path(dir.join("tweets.csv"))?;
    let mut scores = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_path(dir.join("t4sa.csv"))?;
    tweets.write_record(["id", "text"])?;
    scores.write_record(["TWID", "NEG", "NEU", "POS"])?;
    for i in 0..N_TWEETS + N_ORPHAN_SCORES {
        let id = format!("{}", 768_000_000_000_000_000u64 + 7919 * i as u64);
        let class = polarity(&mut rng);
        let fashion = !rng.random_bool(0.1);
        let body = text(&mut rng, class, fashion);
        let (neg, neu, pos) = triple(&mut rng, class);
        if i < N_TWEETS {
            tweets.write_record([id.as_str(), body.as_str()])?;
        }
        if i >= N_UNSCORED {
            scores.write_record([id, neg.to_string(), neu.to_string(), pos.to_string()])?;
        }
    }
    tweets.flush()?;
    scores.flush()?;
    Ok(())
}

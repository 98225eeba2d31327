//! On-disk formats of the intermediate artifacts.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::Serialize;

use super::BoxError;
use crate::chronos::{ThemeSeries, WeekIndex, N_WEEKS};
use crate::ingest::{MergedRecord, SentimentTriple};
use crate::themes::ThemeId;

pub type Result<T> = std::result::Result<T, BoxError>;

pub fn num(x: f64) -> String {
    if x == 0.0 {
        "0".to_owned()
    } else {
        x.to_string()
    }
}

pub fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

pub fn csv_bytes<I>(header: &[&str], rows: I) -> Result<Vec<u8>>
where
    I: IntoIterator<Item = Vec<String>>,
{
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    Ok(w.into_inner().map_err(|e| e.to_string())?)
}

pub fn json_bytes<T: Serialize + ?Sized>(value: &T) -> Result<Vec<u8>> {
    let mut v = serde_json::to_vec_pretty(value)?;
    v.push(b'\n');
    Ok(v)
}

/// Rows of a headed CSV as header-keyed maps.
pub fn read_csv(path: &Path) -> Result<Vec<BTreeMap<String, String>>> {
    let mut rdr = csv::Reader::from_path(path)?;
    let headers = rdr.headers()?.clone();
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        out.push(headers.iter().map(str::to_owned).zip(rec.iter().map(str::to_owned)).collect());
    }
    Ok(out)
}

pub fn field<'a>(row: &'a BTreeMap<String, String>, name: &str) -> Result<&'a str> {
    row.get(name).map(String::as_str).ok_or_else(|| format!("missing column `{name}`").into())
}

pub fn parse_f64(row: &BTreeMap<String, String>, name: &str) -> Result<f64> {
    let s = field(row, name)?;
    s.parse().map_err(|_| format!("column `{name}`: `{s}` is not a number").into())
}

pub fn write_records(records: &[MergedRecord]) -> Result<Vec<u8>> {
    csv_bytes(
        &["id", "text", "pos", "neg", "neu"],
        records.iter().map(|r| vec![r.id.clone(), r.raw_text.clone(), num(r.sentiment.pos), num(r.sentiment.neg), num(r.sentiment.neu)]),
    )
}

pub fn read_records(path: &Path) -> Result<Vec<MergedRecord>> {
    read_csv(path)?
        .iter()
        .map(|row| {
            let id = field(row, "id")?;
            let t = SentimentTriple::new(id, parse_f64(row, "pos")?, parse_f64(row, "neg")?, parse_f64(row, "neu")?)?;
            Ok(MergedRecord::new(id, field(row, "text")?, t))
        })
        .collect()
}

fn join_themes(themes: &BTreeSet<ThemeId>) -> String {
    themes.iter().map(|t| t.as_str()).collect::<Vec<_>>().join(";")
}

pub fn write_tagged(records: &[MergedRecord]) -> Result<Vec<u8>> {
    csv_bytes(&["id", "themes"], records.iter().map(|r| vec![r.id.clone(), join_themes(&r.themes)]))
}

/// Fills `themes` from a tagged table; every record must be listed.
pub fn apply_tags(records: &mut [MergedRecord], path: &Path) -> Result<()> {
    let mut tags: BTreeMap<String, BTreeSet<ThemeId>> = BTreeMap::new();
    for row in read_csv(path)? {
        let themes = field(&row, "themes")?.split(';').filter(|s| !s.is_empty()).map(str::parse).collect::<std::result::Result<_, _>>()?;
        tags.insert(field(&row, "id")?.to_owned(), themes);
    }
    for r in records {
        r.themes = tags.remove(&r.id).ok_or_else(|| format!("record `{}` missing from tag table", r.id))?;
    }
    Ok(())
}

pub fn write_series(series: &[ThemeSeries]) -> Result<Vec<u8>> {
    let mut rows = Vec::new();
    for s in series {
        for (w, (c, m)) in s.counts.iter().zip(&s.mean_sentiment).enumerate() {
            let (y, iso) = WeekIndex::new(w)?.iso();
            rows.push(vec![s.theme.to_string(), w.to_string(), format!("{y}-W{iso:02}"), c.to_string(), opt(*m)]);
        }
    }
    csv_bytes(&["theme", "week", "iso_week", "count", "mean_sentiment"], rows)
}

/// Series for every theme present, in theme order.
pub fn read_series(path: &Path) -> Result<Vec<ThemeSeries>> {
    let mut by_theme: BTreeMap<ThemeId, ThemeSeries> = BTreeMap::new();
    for row in read_csv(path)? {
        let theme: ThemeId = field(&row, "theme")?.parse()?;
        let week: usize = field(&row, "week")?.parse()?;
        if week >= N_WEEKS {
            return Err(format!("week {week} out of range").into());
        }
        let s =
            by_theme.entry(theme).or_insert_with(|| ThemeSeries { theme, counts: vec![0; N_WEEKS], mean_sentiment: vec![None; N_WEEKS] });
        s.counts[week] = field(&row, "count")?.parse()?;
        let m = field(&row, "mean_sentiment")?;
        s.mean_sentiment[week] = if m.is_empty() { None } else { Some(m.parse()?) };
    }
    Ok(by_theme.into_values().collect())
}

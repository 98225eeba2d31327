#![allow(dead_code)]

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use fashion_trends::pipeline::{bundle_files, run_pipeline, RunConfig, RunOutput};
use sha2::{Digest, Sha256};

pub const FIXTURE_SEED: u64 = 42;

pub fn workspace_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

pub fn fixture(name: &str) -> PathBuf {
    workspace_root().join("fixtures").join(name)
}

pub fn golden_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

pub fn fixture_config(out: &Path, jobs: usize) -> RunConfig {
    RunConfig {
        input: Some(fixture("tweets.csv")),
        t4sa: Some(fixture("t4sa.csv")),
        seed: FIXTURE_SEED,
        out: out.to_owned(),
        jobs: Some(jobs),
        ..RunConfig::default()
    }
}

pub fn run_fixture(out: &Path, jobs: usize) -> RunOutput {
    run_pipeline(&fixture_config(out, jobs)).expect("fixture pipeline runs")
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().fold(String::new(), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

/// `<sha256>  <path>` per file, sorted by path.
pub fn manifest(dir: &Path) -> String {
    let mut out = String::new();
    for rel in bundle_files(dir).expect("bundle readable") {
        let bytes = std::fs::read(dir.join(&rel)).expect("file readable");
        let _ = writeln!(out, "{}  {}", sha256_hex(&bytes), rel.display());
    }
    out
}

/// Compares `actual` with a committed golden file, rewriting it instead when
/// `UPDATE_GOLDEN=1`.
pub fn check_golden(name: &str, actual: &str) -> Result<(), String> {
    let path = golden_dir().join(name);
    if std::env::var("UPDATE_GOLDEN").is_ok_and(|v| v == "1") {
        std::fs::create_dir_all(golden_dir()).map_err(|e| e.to_string())?;
        std::fs::write(&path, actual).map_err(|e| e.to_string())?;
        return Ok(());
    }
    let expected = std::fs::read_to_string(&path).map_err(|e| format!("{}: {e}", path.display()))?;
    if expected == actual {
        Ok(())
    } else {
        let diff: Vec<String> =
            expected.lines().zip(actual.lines()).filter(|(a, b)| a != b).take(5).map(|(a, b)| format!("- {a}\n+ {b}")).collect();
        Err(format!("{name} differs from golden:\n{}", diff.join("\n")))
    }
}

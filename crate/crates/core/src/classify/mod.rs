//! Three-class sentiment classification from cleaned text.

pub mod cv;
pub mod forest;
pub mod metrics;
pub mod tfidf;

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use cv::{stratified_kfold, Fold};
pub use forest::{train_forest, ClassWeight, ForestConfig, ForestModel};
pub use metrics::{balanced_accuracy_from_recalls, evaluate, ClassMetrics, EvalReport};
pub use tfidf::{fit_tfidf, SparseVec, TfidfVocabulary};

use crate::seeds;
use crate::sentiment::Polarity;

pub const MODEL_FORMAT_VERSION: u32 = 1;
pub const DEFAULT_FOLDS: usize = 5;

#[derive(Debug, Error)]
pub enum ClassifyError {
    #[error("corpus is empty")]
    EmptyCorpus,
    #[error("only one class present; need at least two")]
    SingleClass,
    #[error("lengths differ ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("label {label} outside 0..{n_classes}")]
    LabelOutOfRange { label: usize, n_classes: usize },
    #[error("feature {feature} outside 0..{n_features}")]
    FeatureOutOfRange { feature: usize, n_features: usize },
    #[error("class weights must be positive and one per class")]
    BadClassWeights,
    #[error("need at least 2 folds, got {0}")]
    BadFoldCount(usize),
    #[error("class {class} has {size} members, fewer than k = {k}")]
    ClassTooSmall { class: usize, size: usize, k: usize },
    #[error("unsupported model format version {0}")]
    Version(u32),
    #[error("model file {}: {source}", path.display())]
    Io {
        path: std::path::PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("model file: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, ClassifyError>;

pub fn polarity_labels() -> [&'static str; 3] {
    Polarity::ALL.map(Polarity::as_str)
}

/// Vocabulary plus forest; the persisted model artifact.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TextClassifier {
    pub format_version: u32,
    pub labels: Vec<String>,
    pub vocabulary: TfidfVocabulary,
    pub forest: ForestModel,
}

impl TextClassifier {
    pub fn train<S: AsRef<str> + Sync>(docs: &[S], labels: &[usize], cfg: &ForestConfig, seed: u64) -> Result<Self> {
        if docs.len() != labels.len() {
            return Err(ClassifyError::LengthMismatch(docs.len(), labels.len()));
        }
        let vocabulary = fit_tfidf(docs)?;
        let x = vocabulary.transform_all(docs);
        let names = polarity_labels();
        let forest = train_forest(&x, labels, vocabulary.len(), names.len(), cfg, seed)?;
        Ok(Self { format_version: MODEL_FORMAT_VERSION, labels: names.iter().map(|s| (*s).to_owned()).collect(), vocabulary, forest })
    }

    pub fn predict(&self, doc: &str) -> usize {
        self.forest.predict(&self.vocabulary.transform(doc))
    }

    pub fn predict_all<S: AsRef<str> + Sync>(&self, docs: &[S]) -> Vec<usize> {
        self.forest.predict_all(&self.vocabulary.transform_all(docs))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let m: Self = serde_json::from_str(text)?;
        if m.format_version != MODEL_FORMAT_VERSION {
            return Err(ClassifyError::Version(m.format_version));
        }
        Ok(m)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?).map_err(|source| ClassifyError::Io { path: path.to_owned(), source })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| ClassifyError::Io { path: path.to_owned(), source })?;
        Self::from_json(&text)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossValidation {
    pub k: usize,
    pub folds: Vec<Fold>,
    /// Out-of-fold prediction for every document.
    pub predictions: Vec<usize>,
    /// Metrics over the pooled out-of-fold predictions.
    pub report: EvalReport,
}

/// Stratified k-fold evaluation; the vocabulary is refit inside each fold.
pub fn cross_validate<S: AsRef<str> + Sync>(
    docs: &[S],
    labels: &[usize],
    k: usize,
    cfg: &ForestConfig,
    seed: u64,
) -> Result<CrossValidation> {
    if docs.len() != labels.len() {
        return Err(ClassifyError::LengthMismatch(docs.len(), labels.len()));
    }
    let folds = stratified_kfold(labels, k, seeds::derive(seed, "folds"))?;
    let mut predictions = vec![0usize; docs.len()];
    for (i, fold) in folds.iter().enumerate() {
        let train_docs: Vec<&str> = fold.train.iter().map(|&j| docs[j].as_ref()).collect();
        let train_labels: Vec<usize> = fold.train.iter().map(|&j| labels[j]).collect();
        let model = TextClassifier::train(&train_docs, &train_labels, cfg, seeds::derive_indexed(seed, "fold", i as u64))?;
        let test_docs: Vec<&str> = fold.test.iter().map(|&j| docs[j].as_ref()).collect();
        for (&j, p) in fold.test.iter().zip(model.predict_all(&test_docs)) {
            predictions[j] = p;
        }
    }
    let report = evaluate(&predictions, labels, &polarity_labels())?;
    Ok(CrossValidation { k, folds, predictions, report })
}

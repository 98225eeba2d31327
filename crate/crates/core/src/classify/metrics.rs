//! Confusion matrix and class-balanced scores.

use serde::{Deserialize, Serialize};

use super::{ClassifyError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub label: String,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub labels: Vec<String>,
    /// Rows are true classes, columns predicted classes.
    pub confusion: Vec<Vec<usize>>,
    pub per_class: Vec<ClassMetrics>,
    pub accuracy: f64,
    /// Mean recall over classes with support.
    pub balanced_accuracy: f64,
    /// Mean F1 over classes that occur in the truth or the predictions.
    pub macro_f1: f64,
    pub n: usize,
}

/// Mean of per-class recalls.
pub fn balanced_accuracy_from_recalls(recalls: &[f64]) -> f64 {
    recalls.iter().sum::<f64>() / recalls.len() as f64
}

fn ratio(a: usize, b: usize) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

pub fn evaluate(preds: &[usize], truth: &[usize], labels: &[&str]) -> Result<EvalReport> {
    if preds.len() != truth.len() {
        return Err(ClassifyError::LengthMismatch(preds.len(), truth.len()));
    }
    if preds.is_empty() {
        return Err(ClassifyError::EmptyCorpus);
    }
    let k = labels.len();
    let mut confusion = vec![vec![0usize; k]; k];
    for (&p, &t) in preds.iter().zip(truth) {
        if p >= k || t >= k {
            return Err(ClassifyError::LabelOutOfRange { label: p.max(t), n_classes: k });
        }
        confusion[t][p] += 1;
    }
    let per_class: Vec<ClassMetrics> = (0..k)
        .map(|c| {
            let tp = confusion[c][c];
            let support: usize = confusion[c].iter().sum();
            let predicted: usize = confusion.iter().map(|row| row[c]).sum();
            let precision = ratio(tp, predicted);
            let recall = ratio(tp, support);
            let f1 = if precision + recall > 0.0 { 2.0 * precision * recall / (precision + recall) } else { 0.0 };
            ClassMetrics { label: labels[c].to_owned(), precision, recall, f1, support }
        })
        .collect();

    let correct: usize = (0..k).map(|c| confusion[c][c]).sum();
    let recalls: Vec<f64> = per_class.iter().filter(|m| m.support > 0).map(|m| m.recall).collect();
    let active: Vec<f64> =
        (0..k).filter(|&c| per_class[c].support > 0 || confusion.iter().any(|row| row[c] > 0)).map(|c| per_class[c].f1).collect();
    Ok(EvalReport {
        labels: labels.iter().map(|s| (*s).to_owned()).collect(),
        confusion,
        accuracy: ratio(correct, preds.len()),
        balanced_accuracy: balanced_accuracy_from_recalls(&recalls),
        macro_f1: active.iter().sum::<f64>() / active.len() as f64,
        per_class,
        n: preds.len(),
    })
}

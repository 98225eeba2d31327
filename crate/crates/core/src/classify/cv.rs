//! Stratified k-fold partitions.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::{ClassifyError, Result};
use crate::seeds;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fold {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

/// Shuffles each class's indices and deals them round-robin into `k` test
/// folds. Each class picks up at the fold after the one where the previous
/// class stopped, which keeps fold sizes within one of each other.
pub fn stratified_kfold(labels: &[usize], k: usize, seed: u64) -> Result<Vec<Fold>> {
    if k < 2 {
        return Err(ClassifyError::BadFoldCount(k));
    }
    let mut by_class: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, &y) in labels.iter().enumerate() {
        by_class.entry(y).or_default().push(i);
    }
    if let Some((&class, members)) = by_class.iter().find(|(_, m)| m.len() < k) {
        return Err(ClassifyError::ClassTooSmall { class, size: members.len(), k });
    }
    let mut rng = seeds::rng(seed);
    let mut tests: Vec<Vec<usize>> = vec![Vec::new(); k];
    let mut next = 0usize;
    for members in by_class.values_mut() {
        members.shuffle(&mut rng);
        for &i in members.iter() {
            tests[next].push(i);
            next = (next + 1) % k;
        }
    }
    let mut fold_of = vec![0usize; labels.len()];
    for (f, t) in tests.iter_mut().enumerate() {
        t.sort_unstable();
        for &i in t.iter() {
            fold_of[i] = f;
        }
    }
    Ok(tests
        .into_iter()
        .enumerate()
        .map(|(f, test)| Fold { train: (0..labels.len()).filter(|&i| fold_of[i] != f).collect(), test })
        .collect())
}

//! Random forest of class-weighted Gini trees over sparse features.

use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::tfidf::SparseVec;
use super::{ClassifyError, Result};
use crate::seeds;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassWeight {
    /// `n / (k * count_c)` over the `k` classes present.
    Balanced,
    Uniform,
    Explicit(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestConfig {
    pub n_trees: usize,
    pub max_depth: usize,
    pub min_samples_split: usize,
    /// Features examined per split; `None` means `floor(sqrt(n_features))`.
    pub max_features: Option<usize>,
    pub class_weight: ClassWeight,
}

impl Default for ForestConfig {
    fn default() -> Self {
        Self { n_trees: 100, max_depth: 30, min_samples_split: 5, max_features: None, class_weight: ClassWeight::Balanced }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Node {
    Split { feature: u32, threshold: f64, left: u32, right: u32 },
    Leaf { distribution: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<Node>,
}

impl Tree {
    pub fn leaf_distribution(&self, x: &SparseVec) -> &[f64] {
        let mut i = 0usize;
        loop {
            match &self.nodes[i] {
                Node::Leaf { distribution } => return distribution,
                Node::Split { feature, threshold, left, right } => {
                    i = if x.get(*feature) <= *threshold { *left } else { *right } as usize;
                }
            }
        }
    }

    pub fn leaves(&self) -> impl Iterator<Item = &[f64]> {
        self.nodes.iter().filter_map(|n| match n {
            Node::Leaf { distribution } => Some(distribution.as_slice()),
            Node::Split { .. } => None,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestModel {
    pub n_classes: usize,
    pub n_features: usize,
    pub class_weights: Vec<f64>,
    pub seed: u64,
    pub config: ForestConfig,
    pub trees: Vec<Tree>,
}

impl ForestModel {
    /// Mean leaf distribution over trees.
    pub fn predict_proba(&self, x: &SparseVec) -> Vec<f64> {
        let mut acc = vec![0.0; self.n_classes];
        for t in &self.trees {
            for (a, p) in acc.iter_mut().zip(t.leaf_distribution(x)) {
                *a += p;
            }
        }
        let n = self.trees.len().max(1) as f64;
        acc.iter_mut().for_each(|a| *a /= n);
        acc
    }

    /// Most probable class; ties go to the lower class index.
    pub fn predict(&self, x: &SparseVec) -> usize {
        argmax(&self.predict_proba(x))
    }

    pub fn predict_all(&self, xs: &[SparseVec]) -> Vec<usize> {
        xs.par_iter().map(|x| self.predict(x)).collect()
    }
}

fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &p) in v.iter().enumerate() {
        if p > v[best] {
            best = i;
        }
    }
    best
}

pub fn class_weights(labels: &[usize], n_classes: usize, scheme: &ClassWeight) -> Result<Vec<f64>> {
    let mut counts = vec![0usize; n_classes];
    for &y in labels {
        if y >= n_classes {
            return Err(ClassifyError::LabelOutOfRange { label: y, n_classes });
        }
        counts[y] += 1;
    }
    let present = counts.iter().filter(|&&c| c > 0).count();
    if present < 2 {
        return Err(ClassifyError::SingleClass);
    }
    Ok(match scheme {
        ClassWeight::Balanced => counts.iter().map(|&c| if c == 0 { 0.0 } else { labels.len() as f64 / (present * c) as f64 }).collect(),
        ClassWeight::Uniform => vec![1.0; n_classes],
        ClassWeight::Explicit(w) => {
            if w.len() != n_classes || w.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
                return Err(ClassifyError::BadClassWeights);
            }
            w.clone()
        }
    })
}

/// Feature-major view of the training rows.
struct Columns(Vec<Vec<(u32, f64)>>);

impl Columns {
    fn new(rows: &[SparseVec], n_features: usize) -> Self {
        let mut cols = vec![Vec::new(); n_features];
        for (r, x) in rows.iter().enumerate() {
            for (&f, &v) in x.indices.iter().zip(&x.values) {
                cols[f as usize].push((r as u32, v));
            }
        }
        Columns(cols)
    }
}

struct Split {
    feature: u32,
    threshold: f64,
    score: f64,
}

struct TreeBuilder<'a> {
    rows: &'a [SparseVec],
    labels: &'a [usize],
    cols: &'a Columns,
    weight: Vec<f64>,
    n_classes: usize,
    mtry: usize,
    cfg: &'a ForestConfig,
    stamp: Vec<u32>,
    epoch: u32,
    rng: seeds::Rng,
}

/// Larger is better: `sum_c l_c^2 / L + sum_c r_c^2 / R`, the weighted Gini
/// decrease up to a node constant.
fn split_score(left: &[f64], total: &[f64]) -> f64 {
    let wl: f64 = left.iter().sum();
    let wt: f64 = total.iter().sum();
    let wr = wt - wl;
    if wl <= 0.0 || wr <= 0.0 {
        return f64::NEG_INFINITY;
    }
    let l: f64 = left.iter().map(|v| v * v).sum::<f64>() / wl;
    let r: f64 = left.iter().zip(total).map(|(a, t)| (t - a) * (t - a)).sum::<f64>() / wr;
    l + r
}

impl TreeBuilder<'_> {
    fn totals(&self, node_rows: &[u32]) -> Vec<f64> {
        let mut t = vec![0.0; self.n_classes];
        for &r in node_rows {
            t[self.labels[r as usize]] += self.weight[r as usize];
        }
        t
    }

    fn best_on_feature(&self, f: u32, node_rows: usize, totals: &[f64]) -> Option<Split> {
        let mut entries: Vec<(f64, u32)> =
            self.cols.0[f as usize].iter().filter(|(r, _)| self.stamp[*r as usize] == self.epoch).map(|&(r, v)| (v, r)).collect();
        let zeros = node_rows - entries.len();
        entries.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let distinct_nz = entries.windows(2).filter(|w| w[0].0 != w[1].0).count() + usize::from(!entries.is_empty());
        if distinct_nz + usize::from(zeros > 0) < 2 {
            return None;
        }

        // Weight of the implicit zero block, by class.
        let mut zero_block = totals.to_vec();
        for &(_, r) in &entries {
            zero_block[self.labels[r as usize]] -= self.weight[r as usize];
        }
        // Values in ascending order, the zero block (row `None`) in place.
        let split_at = entries.partition_point(|e| e.0 < 0.0);
        let mut ordered: Vec<(f64, Option<u32>)> = Vec::with_capacity(entries.len() + 1);
        ordered.extend(entries[..split_at].iter().map(|&(v, r)| (v, Some(r))));
        if zeros > 0 {
            ordered.push((0.0, None));
        }
        ordered.extend(entries[split_at..].iter().map(|&(v, r)| (v, Some(r))));

        let mut left = vec![0.0; self.n_classes];
        let mut best: Option<Split> = None;
        for (i, &(value, row)) in ordered.iter().enumerate() {
            if i > 0 {
                let prev = ordered[i - 1].0;
                if prev < value {
                    let score = split_score(&left, totals);
                    let mid = prev + 0.5 * (value - prev);
                    if best.as_ref().is_none_or(|b| score > b.score) {
                        best = Some(Split { feature: f, threshold: if mid < value { mid } else { prev }, score });
                    }
                }
            }
            match row {
                Some(r) => left[self.labels[r as usize]] += self.weight[r as usize],
                None => left.iter_mut().zip(&zero_block).for_each(|(a, z)| *a += z),
            }
        }
        best
    }

    fn find_split(&mut self, node_rows: &[u32], totals: &[f64]) -> Option<Split> {
        self.epoch += 1;
        for &r in node_rows {
            self.stamp[r as usize] = self.epoch;
        }
        let mut candidates: Vec<u32> = node_rows.iter().flat_map(|&r| self.rows[r as usize].indices.iter().copied()).collect();
        candidates.sort_unstable();
        candidates.dedup();

        let mut best: Option<Split> = None;
        let mut visited = 0;
        for k in 0..candidates.len() {
            let j = self.rng.random_range(k..candidates.len());
            candidates.swap(k, j);
            let Some(s) = self.best_on_feature(candidates[k], node_rows.len(), totals) else {
                continue;
            };
            visited += 1;
            if best.as_ref().is_none_or(|b| s.score > b.score) {
                best = Some(s);
            }
            if visited >= self.mtry {
                break;
            }
        }
        best
    }

    fn build(mut self, in_bag: Vec<u32>) -> Tree {
        let mut nodes = vec![Node::Leaf { distribution: Vec::new() }];
        let mut stack = vec![(0usize, in_bag, 0usize)];
        while let Some((slot, node_rows, depth)) = stack.pop() {
            let totals = self.totals(&node_rows);
            let w: f64 = totals.iter().sum();
            let classes_present = totals.iter().filter(|&&t| t > 0.0).count();
            let split = if depth >= self.cfg.max_depth || node_rows.len() < self.cfg.min_samples_split || classes_present <= 1 {
                None
            } else {
                self.find_split(&node_rows, &totals)
            };
            match split {
                None => {
                    let distribution =
                        if w > 0.0 { totals.iter().map(|t| t / w).collect() } else { vec![1.0 / self.n_classes as f64; self.n_classes] };
                    nodes[slot] = Node::Leaf { distribution };
                }
                Some(s) => {
                    let (l, r): (Vec<u32>, Vec<u32>) =
                        node_rows.iter().partition(|&&row| self.rows[row as usize].get(s.feature) <= s.threshold);
                    let li = nodes.len();
                    nodes.push(Node::Leaf { distribution: Vec::new() });
                    nodes.push(Node::Leaf { distribution: Vec::new() });
                    nodes[slot] = Node::Split { feature: s.feature, threshold: s.threshold, left: li as u32, right: li as u32 + 1 };
                    stack.push((li + 1, r, depth + 1));
                    stack.push((li, l, depth + 1));
                }
            }
        }
        Tree { nodes }
    }
}

/// Trains `cfg.n_trees` trees on bootstrap samples. Tree `i` draws from the
/// seed stream `("tree", i)` under `seed`, so results do not depend on the
/// number of worker threads.
pub fn train_forest(
    rows: &[SparseVec],
    labels: &[usize],
    n_features: usize,
    n_classes: usize,
    cfg: &ForestConfig,
    seed: u64,
) -> Result<ForestModel> {
    if rows.len() != labels.len() {
        return Err(ClassifyError::LengthMismatch(rows.len(), labels.len()));
    }
    if let Some(bad) = rows.iter().flat_map(|r| r.indices.iter()).find(|&&f| f as usize >= n_features) {
        return Err(ClassifyError::FeatureOutOfRange { feature: *bad as usize, n_features });
    }
    let cw = class_weights(labels, n_classes, &cfg.class_weight)?;
    let cols = Columns::new(rows, n_features);
    let mtry = cfg.max_features.unwrap_or((n_features as f64).sqrt().floor() as usize).max(1);
    let n = rows.len();

    let trees = (0..cfg.n_trees)
        .into_par_iter()
        .map(|i| {
            let mut rng = seeds::rng(seeds::derive_indexed(seed, "tree", i as u64));
            let mut mult = vec![0u32; n];
            for _ in 0..n {
                mult[rng.random_range(0..n)] += 1;
            }
            let weight: Vec<f64> = mult.iter().zip(labels).map(|(&m, &y)| f64::from(m) * cw[y]).collect();
            let in_bag: Vec<u32> = (0..n as u32).filter(|&r| mult[r as usize] > 0).collect();
            TreeBuilder { rows, labels, cols: &cols, weight, n_classes, mtry, cfg, stamp: vec![0; n], epoch: 0, rng }.build(in_bag)
        })
        .collect();

    Ok(ForestModel { n_classes, n_features, class_weights: cw, seed, config: cfg.clone(), trees })
}

//! Unigram + bigram TF-IDF with smoothed idf and L2 normalization.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::{ClassifyError, Result};

/// Sparse row: strictly increasing feature indices with their values.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SparseVec {
    pub indices: Vec<u32>,
    pub values: Vec<f64>,
}

impl SparseVec {
    /// Builds from unsorted `(index, value)` pairs; zeros are dropped and
    /// repeated indices are summed.
    pub fn from_pairs(mut pairs: Vec<(u32, f64)>) -> Self {
        pairs.sort_by_key(|p| p.0);
        let mut merged: Vec<(u32, f64)> = Vec::with_capacity(pairs.len());
        for (i, v) in pairs {
            match merged.last_mut() {
                Some(last) if last.0 == i => last.1 += v,
                _ => merged.push((i, v)),
            }
        }
        let (indices, values) = merged.into_iter().filter(|p| p.1 != 0.0).unzip();
        SparseVec { indices, values }
    }

    pub fn dense(values: &[f64]) -> Self {
        Self::from_pairs(values.iter().enumerate().map(|(i, &v)| (i as u32, v)).collect())
    }

    pub fn get(&self, feature: u32) -> f64 {
        self.indices.binary_search(&feature).map_or(0.0, |k| self.values[k])
    }

    pub fn norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn nnz(&self) -> usize {
        self.indices.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermStats {
    pub index: u32,
    pub doc_freq: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TfidfVocabulary {
    pub n_docs: usize,
    /// Indices follow the sorted term order.
    pub terms: BTreeMap<String, TermStats>,
}

/// Whitespace tokens followed by space-joined adjacent pairs.
pub fn ngrams(doc: &str) -> Vec<String> {
    let tokens: Vec<&str> = doc.split_whitespace().collect();
    let mut out: Vec<String> = tokens.iter().map(|t| (*t).to_owned()).collect();
    out.extend(tokens.windows(2).map(|w| format!("{} {}", w[0], w[1])));
    out
}

pub fn idf(n_docs: usize, doc_freq: u32) -> f64 {
    ((1.0 + n_docs as f64) / (1.0 + f64::from(doc_freq))).ln() + 1.0
}

pub fn fit_tfidf<S: AsRef<str>>(docs: &[S]) -> Result<TfidfVocabulary> {
    if docs.is_empty() {
        return Err(ClassifyError::EmptyCorpus);
    }
    let mut df: BTreeMap<String, u32> = BTreeMap::new();
    for d in docs {
        let distinct: BTreeSet<String> = ngrams(d.as_ref()).into_iter().collect();
        for t in distinct {
            *df.entry(t).or_default() += 1;
        }
    }
    let terms = df.into_iter().enumerate().map(|(i, (t, f))| (t, TermStats { index: i as u32, doc_freq: f })).collect();
    Ok(TfidfVocabulary { n_docs: docs.len(), terms })
}

impl TfidfVocabulary {
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Unit-length TF-IDF vector; terms outside the vocabulary are ignored
    /// and a document with no known terms maps to the zero vector.
    pub fn transform(&self, doc: &str) -> SparseVec {
        let mut pairs = Vec::new();
        for g in ngrams(doc) {
            if let Some(s) = self.terms.get(&g) {
                pairs.push((s.index, idf(self.n_docs, s.doc_freq)));
            }
        }
        let mut v = SparseVec::from_pairs(pairs);
        let norm = v.norm();
        if norm > 0.0 {
            for x in &mut v.values {
                *x /= norm;
            }
        }
        v
    }

    pub fn transform_all<S: AsRef<str> + Sync>(&self, docs: &[S]) -> Vec<SparseVec> {
        use rayon::prelude::*;
        docs.par_iter().map(|d| self.transform(d.as_ref())).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn single_document_vocabulary() {
        let v = fit_tfidf(&["a b"]).unwrap();
        let terms: Vec<&str> = v.terms.keys().map(String::as_str).collect();
        assert_eq!(terms, ["a", "a b", "b"]);
        assert!(v.terms.values().all(|s| s.doc_freq == 1));
        let idx: Vec<u32> = v.terms.values().map(|s| s.index).collect();
        assert_eq!(idx, [0, 1, 2]);
    }

    #[test]
    fn ubiquitous_term_has_unit_idf() {
        assert_eq!(idf(4, 4), 1.0);
        let v = fit_tfidf(&["x y", "x", "x z"]).unwrap();
        assert_eq!(v.terms["x"].doc_freq, 3);
        assert_eq!(idf(v.n_docs, v.terms["x"].doc_freq), 1.0);
    }

    #[test]
    fn weights_follow_formula() {
        let docs = ["red dress", "red shoes red", "blue"];
        let v = fit_tfidf(&docs).unwrap();
        let x = v.transform("red shoes red");
        // tf: red 2, shoes 1, "red shoes" 1, "shoes red" 1
        let w = |t: &str, tf: f64| tf * ((4.0 / (1.0 + f64::from(v.terms[t].doc_freq))).ln() + 1.0);
        let raw = [w("red", 2.0), w("shoes", 1.0), w("red shoes", 1.0), w("shoes red", 1.0)];
        let norm = raw.iter().map(|r| r * r).sum::<f64>().sqrt();
        assert!((x.get(v.terms["red"].index) - raw[0] / norm).abs() < 1e-12);
        assert!((x.get(v.terms["shoes red"].index) - raw[3] / norm).abs() < 1e-12);
    }

    #[test]
    fn empty_and_unseen() {
        assert!(matches!(fit_tfidf::<&str>(&[]), Err(ClassifyError::EmptyCorpus)));
        let v = fit_tfidf(&["a b"]).unwrap();
        assert_eq!(v.transform("").nnz(), 0);
        assert_eq!(v.transform("zzz").nnz(), 0);
    }

    proptest! {
        #[test]
        fn unit_norm(docs in proptest::collection::vec("[a-d]{1,2}( [a-d]{1,2}){0,5}", 1..10)) {
            let v = fit_tfidf(&docs).unwrap();
            for d in &docs {
                prop_assert!((v.transform(d).norm() - 1.0).abs() < 1e-12);
            }
        }
    }
}

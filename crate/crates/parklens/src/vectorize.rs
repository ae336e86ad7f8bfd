//! N-gram vocabulary construction and sparse feature vectors under binary,
//! count, or TF-IDF weighting.
//!
//! The vocabulary is built from training documents only; vectorizing other
//! documents never updates document frequencies or the corpus size. Column
//! order is first-appearance order over documents in id order, which makes
//! vectors byte-reproducible across runs.

use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::text::TokenSequence;

/// Term weighting applied by [`Vocabulary::vectorize`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum WeightScheme {
    #[serde(rename = "binary")]
    Binary,
    #[serde(rename = "count")]
    Count,
    #[serde(rename = "tfidf")]
    TfIdf,
}

impl std::fmt::Display for WeightScheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            WeightScheme::Binary => "binary",
            WeightScheme::Count => "count",
            WeightScheme::TfIdf => "tfidf",
        };
        f.write_str(s)
    }
}

/// TF-IDF weight of a term: `tf * ln(n / df)`.
///
/// Natural log; any other base rescales every weight by the same constant.
/// Zero when the term is absent (`tf = 0`) or occurs in every document
/// (`df = n`).
pub fn term_weight_tfidf(tf: f64, df_t: usize, n_docs: usize) -> Result<f64> {
    if df_t == 0 || df_t > n_docs {
        return Err(Error::Data(format!(
            "document frequency {df_t} outside 1..={n_docs}"
        )));
    }
    if !(tf >= 0.0) {
        return Err(Error::Data(format!("term frequency {tf} is negative")));
    }
    Ok(tf * (n_docs as f64 / df_t as f64).ln())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VocabEntry {
    pub term: String,
    pub df: usize,
}

/// Ordered n-gram to column-index map with per-entry document frequencies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "VocabularyRepr", into = "VocabularyRepr")]
pub struct Vocabulary {
    entries: Vec<VocabEntry>,
    index: HashMap<String, usize>,
    n_docs: usize,
    ngram_range: (usize, usize),
    min_df: usize,
}

#[derive(Serialize, Deserialize)]
struct VocabularyRepr {
    ngram_range: (usize, usize),
    min_df: usize,
    n_docs: usize,
    entries: Vec<VocabEntry>,
}

impl From<Vocabulary> for VocabularyRepr {
    fn from(v: Vocabulary) -> Self {
        VocabularyRepr {
            ngram_range: v.ngram_range,
            min_df: v.min_df,
            n_docs: v.n_docs,
            entries: v.entries,
        }
    }
}

impl TryFrom<VocabularyRepr> for Vocabulary {
    type Error = Error;

    fn try_from(r: VocabularyRepr) -> Result<Self> {
        let mut index = HashMap::with_capacity(r.entries.len());
        for (i, e) in r.entries.iter().enumerate() {
            if e.df == 0 || e.df > r.n_docs {
                return Err(Error::Data(format!(
                    "vocabulary entry {:?} has df {} outside 1..={}",
                    e.term, e.df, r.n_docs
                )));
            }
            if index.insert(e.term.clone(), i).is_some() {
                return Err(Error::Data(format!(
                    "vocabulary contains duplicate term {:?}",
                    e.term
                )));
            }
        }
        Ok(Vocabulary {
            entries: r.entries,
            index,
            n_docs: r.n_docs,
            ngram_range: r.ngram_range,
            min_df: r.min_df,
        })
    }
}

/// Join a token window into an n-gram key.
fn ngram_key(window: &[String]) -> String {
    window.join("_")
}

impl Vocabulary {
    /// Build the vocabulary from training documents.
    ///
    /// Keeps every contiguous n-gram with `n` in `ngram_range` whose document
    /// frequency reaches `min_df`. Within a document, n-gram sizes are
    /// scanned in ascending order, positions left to right.
    pub fn build(
        train_docs: &[TokenSequence],
        ngram_range: (usize, usize),
        min_df: usize,
    ) -> Result<Self> {
        if train_docs.is_empty() {
            return Err(Error::Data("cannot build a vocabulary from an empty corpus".into()));
        }
        let (lo, hi) = ngram_range;
        if lo < 1 || lo > hi {
            return Err(Error::Config(format!(
                "invalid ngram range ({lo}, {hi}); need 1 <= lo <= hi"
            )));
        }
        if min_df < 1 {
            return Err(Error::Config("min_df must be at least 1".into()));
        }

        let mut order: Vec<String> = Vec::new();
        let mut df: HashMap<String, usize> = HashMap::new();
        for doc in train_docs {
            let tokens = doc.tokens();
            let mut seen_in_doc: HashSet<String> = HashSet::new();
            for n in lo..=hi {
                if tokens.len() < n {
                    break;
                }
                for window in tokens.windows(n) {
                    let key = ngram_key(window);
                    if seen_in_doc.insert(key.clone()) {
                        match df.get_mut(&key) {
                            Some(count) => *count += 1,
                            None => {
                                df.insert(key.clone(), 1);
                                order.push(key);
                            }
                        }
                    }
                }
            }
        }

        let mut entries = Vec::new();
        let mut index = HashMap::new();
        for term in order {
            let count = df[&term];
            if count >= min_df {
                index.insert(term.clone(), entries.len());
                entries.push(VocabEntry { term, df: count });
            }
        }
        Ok(Vocabulary {
            entries,
            index,
            n_docs: train_docs.len(),
            ngram_range,
            min_df,
        })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn n_docs(&self) -> usize {
        self.n_docs
    }

    pub fn ngram_range(&self) -> (usize, usize) {
        self.ngram_range
    }

    pub fn min_df(&self) -> usize {
        self.min_df
    }

    pub fn entries(&self) -> &[VocabEntry] {
        &self.entries
    }

    pub fn column(&self, term: &str) -> Option<usize> {
        self.index.get(term).copied()
    }

    pub fn df(&self, term: &str) -> Option<usize> {
        self.column(term).map(|i| self.entries[i].df)
    }

    /// Map a token sequence to a sparse feature vector under `scheme`.
    /// Out-of-vocabulary n-grams are ignored; the vocabulary is not mutated.
    pub fn vectorize(&self, doc: &TokenSequence, scheme: WeightScheme) -> FeatureVector {
        let tokens = doc.tokens();
        let (lo, hi) = self.ngram_range;
        let mut counts: HashMap<usize, f64> = HashMap::new();
        for n in lo..=hi {
            if tokens.len() < n {
                break;
            }
            for window in tokens.windows(n) {
                if let Some(col) = self.index.get(&ngram_key(window)) {
                    *counts.entry(*col).or_insert(0.0) += 1.0;
                }
            }
        }
        let mut entries: Vec<(usize, f64)> = counts
            .into_iter()
            .filter_map(|(col, tf)| {
                let weight = match scheme {
                    WeightScheme::Binary => 1.0,
                    WeightScheme::Count => tf,
                    WeightScheme::TfIdf => term_weight_tfidf(tf, self.entries[col].df, self.n_docs)
                        .expect("vocabulary df invariant guarantees a valid domain"),
                };
                (weight != 0.0).then_some((col, weight))
            })
            .collect();
        entries.sort_unstable_by_key(|&(col, _)| col);
        FeatureVector {
            dim: self.entries.len(),
            scheme,
            entries,
        }
    }
}

/// Sparse column-to-weight map under one weighting scheme. Zeros are never
/// stored; entries are sorted by column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    dim: usize,
    scheme: WeightScheme,
    entries: Vec<(usize, f64)>,
}

impl FeatureVector {
    pub fn new(dim: usize, scheme: WeightScheme, entries: Vec<(usize, f64)>) -> Result<Self> {
        let mut last: Option<usize> = None;
        for &(col, w) in &entries {
            if col >= dim {
                return Err(Error::Data(format!(
                    "feature column {col} outside dimensionality {dim}"
                )));
            }
            if last.is_some_and(|p| p >= col) {
                return Err(Error::Data("feature columns must be strictly increasing".into()));
            }
            if !w.is_finite() {
                return Err(Error::Data(format!("non-finite weight at column {col}")));
            }
            if w == 0.0 {
                return Err(Error::Data(format!(
                    "explicit zero weight at column {col}; zeros are unstored"
                )));
            }
            last = Some(col);
        }
        Ok(FeatureVector { dim, scheme, entries })
    }

    /// Build from a dense slice, skipping zeros.
    pub fn from_dense(scheme: WeightScheme, values: &[f64]) -> Self {
        let entries = values
            .iter()
            .enumerate()
            .filter(|(_, &v)| v != 0.0)
            .map(|(i, &v)| (i, v))
            .collect();
        FeatureVector {
            dim: values.len(),
            scheme,
            entries,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn scheme(&self) -> WeightScheme {
        self.scheme
    }

    pub fn entries(&self) -> &[(usize, f64)] {
        &self.entries
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn get(&self, col: usize) -> f64 {
        self.entries
            .binary_search_by_key(&col, |&(c, _)| c)
            .map(|i| self.entries[i].1)
            .unwrap_or(0.0)
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let mut dense = vec![0.0; self.dim];
        for &(col, w) in &self.entries {
            dense[col] = w;
        }
        dense
    }

    pub fn dot(&self, other: &FeatureVector) -> Result<f64> {
        self.check_dim(other)?;
        Ok(self.dot_unchecked(other))
    }

    pub(crate) fn dot_unchecked(&self, other: &FeatureVector) -> f64 {
        let (mut i, mut j) = (0, 0);
        let mut sum = 0.0;
        while i < self.entries.len() && j < other.entries.len() {
            let (ci, wi) = self.entries[i];
            let (cj, wj) = other.entries[j];
            match ci.cmp(&cj) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    sum += wi * wj;
                    i += 1;
                    j += 1;
                }
            }
        }
        sum
    }

    pub fn squared_distance(&self, other: &FeatureVector) -> Result<f64> {
        self.check_dim(other)?;
        Ok(self.squared_distance_unchecked(other))
    }

    pub(crate) fn squared_distance_unchecked(&self, other: &FeatureVector) -> f64 {
        let (mut i, mut j) = (0, 0);
        let mut sum = 0.0;
        while i < self.entries.len() || j < other.entries.len() {
            let ci = self.entries.get(i).map(|&(c, _)| c);
            let cj = other.entries.get(j).map(|&(c, _)| c);
            let d = match (ci, cj) {
                (Some(a), Some(b)) if a == b => {
                    let d = self.entries[i].1 - other.entries[j].1;
                    i += 1;
                    j += 1;
                    d
                }
                (Some(a), Some(b)) if a < b => {
                    let d = self.entries[i].1;
                    i += 1;
                    d
                }
                (Some(_), Some(_)) => {
                    let d = -other.entries[j].1;
                    j += 1;
                    d
                }
                (Some(_), None) => {
                    let d = self.entries[i].1;
                    i += 1;
                    d
                }
                (None, Some(_)) => {
                    let d = -other.entries[j].1;
                    j += 1;
                    d
                }
                (None, None) => unreachable!(),
            };
            sum += d * d;
        }
        sum
    }

    pub(crate) fn check_dim(&self, other: &FeatureVector) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: other.dim,
            });
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn doc(tokens: &[&str]) -> TokenSequence {
        TokenSequence::new(tokens.iter().map(|t| t.to_string()).collect()).unwrap()
    }

    #[test]
    fn unigram_vocabulary_order_and_df() {
        let docs = vec![doc(&["a", "b"]), doc(&["b", "c"])];
        let v = Vocabulary::build(&docs, (1, 1), 1).unwrap();
        assert_eq!(v.column("a"), Some(0));
        assert_eq!(v.column("b"), Some(1));
        assert_eq!(v.column("c"), Some(2));
        assert_eq!(v.df("a"), Some(1));
        assert_eq!(v.df("b"), Some(2));
        assert_eq!(v.df("c"), Some(1));
        assert_eq!(v.n_docs(), 2);
    }

    #[test]
    fn bigrams_are_included_in_range() {
        let docs = vec![doc(&["a", "b"]), doc(&["b", "c"])];
        let v = Vocabulary::build(&docs, (1, 2), 1).unwrap();
        assert_eq!(v.df("a_b"), Some(1));
        assert_eq!(v.df("b_c"), Some(1));
        assert_eq!(v.len(), 5);
    }

    #[test]
    fn min_df_filters_rare_terms() {
        let docs = vec![doc(&["a", "b"]), doc(&["b", "c"])];
        let v = Vocabulary::build(&docs, (1, 1), 2).unwrap();
        assert_eq!(v.len(), 1);
        assert_eq!(v.column("b"), Some(0));
    }

    #[test]
    fn empty_corpus_is_an_error() {
        assert!(Vocabulary::build(&[], (1, 1), 1).is_err());
    }

    #[test]
    fn tfidf_weight_matches_hand_values() {
        // tf 2, df 1, n 3 -> 2 ln 3
        let w = term_weight_tfidf(2.0, 1, 3).unwrap();
        assert!((w - 2.0 * 3.0_f64.ln()).abs() < 1e-15);
        // a term in every document weighs zero
        assert_eq!(term_weight_tfidf(5.0, 7, 7).unwrap(), 0.0);
        assert_eq!(term_weight_tfidf(0.0, 3, 7).unwrap(), 0.0);
    }

    #[test]
    fn tfidf_domain_errors() {
        assert!(term_weight_tfidf(1.0, 0, 3).is_err());
        assert!(term_weight_tfidf(1.0, 4, 3).is_err());
        assert!(term_weight_tfidf(-1.0, 1, 3).is_err());
    }

    #[test]
    fn vectorize_count_binary_tfidf() {
        let docs = vec![doc(&["a", "b"]), doc(&["b", "c"])];
        let v = Vocabulary::build(&docs, (1, 1), 1).unwrap();
        let d = doc(&["b", "b", "c"]);

        let count = v.vectorize(&d, WeightScheme::Count);
        assert_eq!(count.entries(), &[(1, 2.0), (2, 1.0)]);

        let binary = v.vectorize(&d, WeightScheme::Binary);
        assert_eq!(binary.entries(), &[(1, 1.0), (2, 1.0)]);

        let tfidf = v.vectorize(&d, WeightScheme::TfIdf);
        // b occurs in every doc -> weight 0, unstored; c -> 1 * ln 2.
        assert_eq!(tfidf.nnz(), 1);
        assert!((tfidf.get(2) - 2.0_f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn out_of_vocabulary_tokens_are_ignored() {
        let docs = vec![doc(&["a"])];
        let v = Vocabulary::build(&docs, (1, 1), 1).unwrap();
        let fv = v.vectorize(&doc(&["z", "a", "z"]), WeightScheme::Count);
        assert_eq!(fv.entries(), &[(0, 1.0)]);
    }

    #[test]
    fn feature_vector_validation() {
        assert!(FeatureVector::new(3, WeightScheme::Count, vec![(0, 1.0), (2, 2.0)]).is_ok());
        assert!(FeatureVector::new(3, WeightScheme::Count, vec![(3, 1.0)]).is_err());
        assert!(FeatureVector::new(3, WeightScheme::Count, vec![(1, 1.0), (1, 2.0)]).is_err());
        assert!(FeatureVector::new(3, WeightScheme::Count, vec![(0, f64::NAN)]).is_err());
        assert!(FeatureVector::new(3, WeightScheme::Count, vec![(0, 0.0)]).is_err());
    }

    #[test]
    fn sparse_ops_match_dense() {
        let a = FeatureVector::from_dense(WeightScheme::Count, &[1.0, 0.0, 2.0, 0.0]);
        let b = FeatureVector::from_dense(WeightScheme::Count, &[0.0, 3.0, 4.0, 1.0]);
        assert_eq!(a.dot(&b).unwrap(), 8.0);
        assert_eq!(a.squared_distance(&b).unwrap(), 1.0 + 9.0 + 4.0 + 1.0);
        let c = FeatureVector::from_dense(WeightScheme::Count, &[1.0]);
        assert!(a.dot(&c).is_err());
    }

    #[test]
    fn vocabulary_round_trips_through_json() {
        let docs = vec![doc(&["a", "b"]), doc(&["b", "c"])];
        let v = Vocabulary::build(&docs, (1, 2), 1).unwrap();
        let json = serde_json::to_string(&v).unwrap();
        let back: Vocabulary = serde_json::from_str(&json).unwrap();
        assert_eq!(back.len(), v.len());
        assert_eq!(back.column("b_c"), v.column("b_c"));
        assert_eq!(back.df("b"), v.df("b"));
    }
}

//! Okapi BM25 over an in-memory inverted index.
//!
//! IDF uses the smoothed non-negative form `ln(1 + (N - df + 0.5) / (df + 0.5))`.
//! Query terms are de-duplicated; a document scores only on terms it shares
//! with the query, so non-matching documents never appear in results.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::{RankedList, Retriever};
use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::text::tokenize;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SparseIndexConfig {
    /// Term-frequency saturation `k1`.
    pub k1: f64,
    /// Length normalisation `b`.
    pub b: f64,
    pub top_k: usize,
}

impl SparseIndexConfig {
    /// `k1 = 1.2, b = 0.75`, the multi-hop setting.
    pub fn multi_hop() -> Self {
        Self {
            k1: 1.2,
            b: 0.75,
            top_k: 100,
        }
    }

    /// `k1 = 0.9, b = 0.4`, the conversational setting.
    pub fn conversational() -> Self {
        Self {
            k1: 0.9,
            b: 0.4,
            top_k: 100,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.k1.is_finite() && self.k1 >= 0.0) {
            return Err(Error::config("sparse.k1", "must be a finite value >= 0"));
        }
        if !(0.0..=1.0).contains(&self.b) {
            return Err(Error::config("sparse.b", "must lie in [0, 1]"));
        }
        if self.top_k == 0 {
            return Err(Error::config("sparse.top_k", "must be at least 1"));
        }
        Ok(())
    }
}

impl Default for SparseIndexConfig {
    fn default() -> Self {
        Self::multi_hop()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
struct Posting {
    doc: u32,
    tf: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparseIndex<S> {
    config: SparseIndexConfig,
    doc_ids: Vec<String>,
    doc_lens: Vec<usize>,
    avg_len: S,
    postings: BTreeMap<String, Vec<Posting>>,
}

pub fn build_sparse_index<S: Real>(
    corpus: &Corpus,
    config: SparseIndexConfig,
) -> Result<SparseIndex<S>> {
    config.validate()?;
    if corpus.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let mut doc_ids = Vec::with_capacity(corpus.len());
    let mut doc_lens = Vec::with_capacity(corpus.len());
    let mut postings: BTreeMap<String, Vec<Posting>> = BTreeMap::new();
    for (i, doc) in corpus.documents().iter().enumerate() {
        let tokens = tokenize(&doc.text);
        doc_ids.push(doc.id.clone());
        doc_lens.push(tokens.len());
        let mut tf: BTreeMap<String, u32> = BTreeMap::new();
        for t in tokens {
            *tf.entry(t).or_default() += 1;
        }
        for (term, tf) in tf {
            postings
                .entry(term)
                .or_default()
                .push(Posting { doc: i as u32, tf });
        }
    }
    let total: usize = doc_lens.iter().sum();
    let avg_len = S::from_usize(total) / S::from_usize(doc_ids.len());
    Ok(SparseIndex {
        config,
        doc_ids,
        doc_lens,
        avg_len,
        postings,
    })
}

impl<S: Real> SparseIndex<S> {
    pub fn config(&self) -> &SparseIndexConfig {
        &self.config
    }

    pub fn num_docs(&self) -> usize {
        self.doc_ids.len()
    }

    pub fn vocabulary(&self) -> impl Iterator<Item = &str> {
        self.postings.keys().map(String::as_str)
    }

    pub fn doc_len(&self, doc_id: &str) -> Option<usize> {
        self.doc_ids
            .iter()
            .position(|d| d == doc_id)
            .map(|i| self.doc_lens[i])
    }

    pub fn avg_len(&self) -> S {
        self.avg_len
    }

    /// Smoothed IDF of `term`, `None` for out-of-vocabulary terms.
    pub fn idf(&self, term: &str) -> Option<S> {
        let df = self.postings.get(term)?.len();
        let n = S::from_usize(self.num_docs());
        let df = S::from_usize(df);
        let half = S::from_f64(0.5);
        Some((S::one() + (n - df + half) / (df + half)).ln())
    }

    /// BM25 top-k. Queries with no indexed terms return an empty list.
    pub fn search(&self, query: &str, top_k: usize) -> RankedList<S> {
        let terms: BTreeSet<String> = tokenize(query).into_iter().collect();
        let k1 = S::from_f64(self.config.k1);
        let b = S::from_f64(self.config.b);
        let mut scores: Vec<Option<S>> = vec![None; self.num_docs()];
        for term in &terms {
            let (Some(postings), Some(idf)) = (self.postings.get(term), self.idf(term)) else {
                continue;
            };
            for p in postings {
                let tf = S::from_usize(p.tf as usize);
                let len = S::from_usize(self.doc_lens[p.doc as usize]);
                let norm = k1 * (S::one() - b + b * len / self.avg_len);
                let term_score = idf * tf * (k1 + S::one()) / (tf + norm);
                let slot = &mut scores[p.doc as usize];
                *slot = Some(slot.unwrap_or_else(S::zero) + term_score);
            }
        }
        let scored = scores
            .into_iter()
            .enumerate()
            .filter_map(|(i, s)| s.map(|s| (self.doc_ids[i].clone(), s)))
            .collect();
        RankedList::from_scored(query, scored, top_k)
    }
}

impl<S: Real> Retriever<S> for SparseIndex<S> {
    fn search(&self, query: &str, top_k: usize) -> Result<RankedList<S>> {
        Ok(SparseIndex::search(self, query, top_k))
    }
}

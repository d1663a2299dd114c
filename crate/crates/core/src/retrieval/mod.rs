//! Top-k retrieval producing [`RankedList`]s.
//!
//! Every retriever breaks score ties by ascending document id so that runs
//! are bit-reproducible.

mod dense;
mod sparse;

use std::cmp::Ordering;
use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub use dense::{
    build_dense_index, embed_text, load_embeddings, DenseIndex, DenseIndexConfig, Embedding,
    EmbeddingSource, EmbeddingStore,
};
pub use sparse::{build_sparse_index, SparseIndex, SparseIndexConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedEntry<S> {
    pub doc_id: String,
    pub score: S,
    /// 1-based position.
    pub rank: usize,
}

/// Ordered retrieval output for one query.
///
/// Ranks are contiguous from 1, scores are non-increasing and document ids
/// are distinct.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedList<S> {
    pub query_text: String,
    entries: Vec<RankedEntry<S>>,
}

/// Descending score, then ascending id.
pub(crate) fn score_order<S: PartialOrd>(a: (&str, &S), b: (&str, &S)) -> Ordering {
    b.1.partial_cmp(a.1)
        .unwrap_or(Ordering::Equal)
        .then_with(|| a.0.cmp(b.0))
}

impl<S: Scalar> RankedList<S> {
    pub fn empty(query_text: impl Into<String>) -> Self {
        Self {
            query_text: query_text.into(),
            entries: Vec::new(),
        }
    }

    /// Sorts `(doc_id, score)` pairs by descending score (ties by id),
    /// keeps the first `top_k` and assigns ranks.
    pub fn from_scored(
        query_text: impl Into<String>,
        mut scored: Vec<(String, S)>,
        top_k: usize,
    ) -> Self {
        scored.sort_by(|a, b| score_order((&a.0, &a.1), (&b.0, &b.1)));
        scored.truncate(top_k);
        let entries = scored
            .into_iter()
            .enumerate()
            .map(|(i, (doc_id, score))| RankedEntry {
                doc_id,
                score,
                rank: i + 1,
            })
            .collect();
        Self {
            query_text: query_text.into(),
            entries,
        }
    }

    /// Wraps already-ranked entries, checking the list invariants.
    pub fn from_entries(
        query_text: impl Into<String>,
        entries: Vec<RankedEntry<S>>,
    ) -> std::result::Result<Self, String> {
        let list = Self {
            query_text: query_text.into(),
            entries,
        };
        list.check()?;
        Ok(list)
    }

    /// Builds a list from externally produced rankings whose scores need not
    /// be monotone in rank. Ranks must still be `1..=n` and ids unique.
    pub fn from_ranks(
        query_text: impl Into<String>,
        entries: Vec<RankedEntry<S>>,
    ) -> std::result::Result<Self, String> {
        let list = Self {
            query_text: query_text.into(),
            entries,
        };
        list.check_ranks()?;
        Ok(list)
    }

    /// Contiguous 1-based ranks and unique ids.
    pub fn check_ranks(&self) -> std::result::Result<(), String> {
        let mut seen = HashSet::with_capacity(self.entries.len());
        for (i, e) in self.entries.iter().enumerate() {
            if e.rank != i + 1 {
                return Err(format!(
                    "entry {i} ({:?}) has rank {}, expected {}",
                    e.doc_id,
                    e.rank,
                    i + 1
                ));
            }
            if !seen.insert(e.doc_id.as_str()) {
                return Err(format!("document {:?} appears twice", e.doc_id));
            }
        }
        Ok(())
    }

    /// [`check_ranks`](Self::check_ranks) plus non-increasing scores.
    pub fn check(&self) -> std::result::Result<(), String> {
        let mut seen = HashSet::with_capacity(self.entries.len());
        for (i, e) in self.entries.iter().enumerate() {
            if e.rank != i + 1 {
                return Err(format!(
                    "entry {i} ({:?}) has rank {}, expected {}",
                    e.doc_id,
                    e.rank,
                    i + 1
                ));
            }
            if !seen.insert(e.doc_id.as_str()) {
                return Err(format!("document {:?} appears twice", e.doc_id));
            }
            if i > 0 && self.entries[i - 1].score < e.score {
                return Err(format!("score increases at rank {}", e.rank));
            }
        }
        Ok(())
    }

    pub fn entries(&self) -> &[RankedEntry<S>] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn doc_ids(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|e| e.doc_id.as_str())
    }
}

/// Anything that maps a query string to a top-k ranked list.
///
/// Implementations must be safe for concurrent reads.
pub trait Retriever<S>: Sync {
    fn search(&self, query: &str, top_k: usize) -> Result<RankedList<S>>;
}

impl<S, R: Retriever<S> + ?Sized> Retriever<S> for &R {
    fn search(&self, query: &str, top_k: usize) -> Result<RankedList<S>> {
        (**self).search(query, top_k)
    }
}

/// Retriever backed by a fixed table of per-query result lists; unknown
/// queries retrieve nothing. Used for engineered environments and replays.
#[derive(Debug, Clone, Default)]
pub struct LookupRetriever<S> {
    lists: HashMap<String, Vec<(String, S)>>,
}

impl<S: Scalar> LookupRetriever<S> {
    pub fn new() -> Self {
        Self {
            lists: HashMap::new(),
        }
    }

    /// Registers the results for `query`, best first. Scores must be
    /// non-increasing.
    pub fn insert<I, D>(&mut self, query: impl Into<String>, results: I) -> Result<()>
    where
        I: IntoIterator<Item = (D, S)>,
        D: Into<String>,
    {
        let results: Vec<(String, S)> = results.into_iter().map(|(d, s)| (d.into(), s)).collect();
        let list = RankedList::from_entries(
            "",
            results
                .iter()
                .enumerate()
                .map(|(i, (d, s))| RankedEntry {
                    doc_id: d.clone(),
                    score: *s,
                    rank: i + 1,
                })
                .collect(),
        );
        if let Err(reason) = list {
            return Err(Error::InvalidRankedList { list: 0, reason });
        }
        self.lists.insert(query.into(), results);
        Ok(())
    }
}

impl<S: Scalar> Retriever<S> for LookupRetriever<S> {
    fn search(&self, query: &str, top_k: usize) -> Result<RankedList<S>> {
        let Some(results) = self.lists.get(query) else {
            return Ok(RankedList::empty(query));
        };
        let entries = results
            .iter()
            .take(top_k)
            .enumerate()
            .map(|(i, (d, s))| RankedEntry {
                doc_id: d.clone(),
                score: *s,
                rank: i + 1,
            })
            .collect();
        Ok(RankedList {
            query_text: query.to_string(),
            entries,
        })
    }
}

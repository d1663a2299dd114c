//! Exact inner-product search over document vectors.
//!
//! Vectors come either from a line-delimited embedding file
//! (`{"id": str, "vector": [float, ...]}`) or from hashed term-frequency
//! features projected into `dimension` buckets and L2-normalised.

use std::collections::HashMap;
use std::hash::Hasher;
use std::path::Path;

use fnv::FnvHasher;
use serde::{Deserialize, Serialize};

use super::{RankedList, Retriever};
use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::text::tokenize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EmbeddingSource {
    FileProvided,
    HashedFeatures,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DenseIndexConfig {
    pub dimension: usize,
    pub top_k: usize,
    pub embedding_source: EmbeddingSource,
}

impl Default for DenseIndexConfig {
    fn default() -> Self {
        Self {
            dimension: 256,
            top_k: 100,
            embedding_source: EmbeddingSource::HashedFeatures,
        }
    }
}

impl DenseIndexConfig {
    pub fn validate(&self) -> Result<()> {
        if self.dimension == 0 {
            return Err(Error::config("dense.dimension", "must be at least 1"));
        }
        if self.top_k == 0 {
            return Err(Error::config("dense.top_k", "must be at least 1"));
        }
        Ok(())
    }
}

/// Pre-computed vectors keyed by document id or by literal query text.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingStore<S> {
    vectors: HashMap<String, Vec<S>>,
}

impl<S: Real> EmbeddingStore<S> {
    pub fn new() -> Self {
        Self {
            vectors: HashMap::new(),
        }
    }

    pub fn insert(&mut self, key: impl Into<String>, vector: Vec<S>) {
        self.vectors.insert(key.into(), vector);
    }

    pub fn get(&self, key: &str) -> Option<&[S]> {
        self.vectors.get(key).map(Vec::as_slice)
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }
}

#[derive(Deserialize)]
struct EmbeddingRecord {
    id: String,
    vector: Vec<f64>,
}

pub fn load_embeddings<S: Real>(path: &Path) -> Result<EmbeddingStore<S>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut store = EmbeddingStore::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let rec: EmbeddingRecord =
            serde_json::from_str(line).map_err(|e| Error::MalformedRecord {
                path: path.to_path_buf(),
                line: i + 1,
                reason: e.to_string(),
            })?;
        store.insert(rec.id, rec.vector.into_iter().map(S::from_f64).collect());
    }
    Ok(store)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Embedding<S> {
    pub vector: Vec<S>,
    /// Set when the text had no tokens and the vector is all zeros.
    pub is_zero: bool,
}

fn hashed_features<S: Real>(text: &str, dimension: usize) -> Embedding<S> {
    let mut v = vec![S::zero(); dimension];
    for token in tokenize(text) {
        let mut h = FnvHasher::default();
        h.write(token.as_bytes());
        let bucket = (h.finish() % dimension as u64) as usize;
        v[bucket] = v[bucket] + S::one();
    }
    let norm = v.iter().fold(S::zero(), |acc, &x| acc + x * x).sqrt();
    if norm == S::zero() {
        return Embedding {
            vector: v,
            is_zero: true,
        };
    }
    for x in &mut v {
        *x = *x / norm;
    }
    Embedding {
        vector: v,
        is_zero: false,
    }
}

/// Embeds `text`. In file-provided mode `text` is used as the lookup key.
pub fn embed_text<S: Real>(
    text: &str,
    config: &DenseIndexConfig,
    store: Option<&EmbeddingStore<S>>,
) -> Result<Embedding<S>> {
    match config.embedding_source {
        EmbeddingSource::HashedFeatures => Ok(hashed_features(text, config.dimension)),
        EmbeddingSource::FileProvided => {
            let vector = store
                .and_then(|s| s.get(text))
                .ok_or_else(|| Error::MissingEmbedding(text.to_string()))?;
            if vector.len() != config.dimension {
                return Err(Error::DimensionMismatch {
                    doc_id: text.to_string(),
                    expected: config.dimension,
                    got: vector.len(),
                });
            }
            let is_zero = vector.iter().all(|x| x.is_zero());
            Ok(Embedding {
                vector: vector.to_vec(),
                is_zero,
            })
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseIndex<S> {
    config: DenseIndexConfig,
    doc_ids: Vec<String>,
    vectors: Vec<Vec<S>>,
    store: Option<EmbeddingStore<S>>,
}

/// Builds a flat index. In file-provided mode each document is looked up by
/// its id in `store`, which is kept for embedding queries.
pub fn build_dense_index<S: Real>(
    corpus: &Corpus,
    config: DenseIndexConfig,
    store: Option<EmbeddingStore<S>>,
) -> Result<DenseIndex<S>> {
    config.validate()?;
    if corpus.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let mut doc_ids = Vec::with_capacity(corpus.len());
    let mut vectors = Vec::with_capacity(corpus.len());
    for doc in corpus.documents() {
        let vector = match config.embedding_source {
            EmbeddingSource::HashedFeatures => hashed_features(&doc.text, config.dimension).vector,
            EmbeddingSource::FileProvided => {
                let v = store
                    .as_ref()
                    .and_then(|s| s.get(&doc.id))
                    .ok_or_else(|| Error::MissingEmbedding(doc.id.clone()))?;
                if v.len() != config.dimension {
                    return Err(Error::DimensionMismatch {
                        doc_id: doc.id.clone(),
                        expected: config.dimension,
                        got: v.len(),
                    });
                }
                v.to_vec()
            }
        };
        doc_ids.push(doc.id.clone());
        vectors.push(vector);
    }
    Ok(DenseIndex {
        config,
        doc_ids,
        vectors,
        store,
    })
}

impl<S: Real> DenseIndex<S> {
    pub fn config(&self) -> &DenseIndexConfig {
        &self.config
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn embed(&self, text: &str) -> Result<Embedding<S>> {
        embed_text(text, &self.config, self.store.as_ref())
    }

    /// Brute-force inner product against every stored vector.
    pub fn search_vector(&self, query_text: &str, query: &[S], top_k: usize) -> RankedList<S> {
        let scored = self
            .doc_ids
            .iter()
            .zip(&self.vectors)
            .map(|(id, v)| {
                let dot = v
                    .iter()
                    .zip(query)
                    .fold(S::zero(), |acc, (&a, &b)| acc + a * b);
                (id.clone(), dot)
            })
            .collect();
        RankedList::from_scored(query_text, scored, top_k)
    }

    pub fn search(&self, query: &str, top_k: usize) -> Result<RankedList<S>> {
        let emb = self.embed(query)?;
        Ok(self.search_vector(query, &emb.vector, top_k))
    }
}

impl<S: Real> Retriever<S> for DenseIndex<S> {
    fn search(&self, query: &str, top_k: usize) -> Result<RankedList<S>> {
        DenseIndex::search(self, query, top_k)
    }
}

//! Corpus, query and candidate-pool loading.
//!
//! Both files are line-delimited JSON. Documents are `{"id", "text"}`;
//! queries are `{"id", "text", "history", "gold_ids", "candidates"}` where
//! `history` (a list of `[question, answer]` pairs) and `candidates` (a list
//! of sub-query lists) may be omitted.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub id: String,
    pub text: String,
}

/// Immutable document collection with id lookup.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Corpus {
    docs: Vec<Document>,
    by_id: HashMap<String, usize>,
}

impl Corpus {
    pub fn from_documents(docs: Vec<Document>) -> Result<Self> {
        if docs.is_empty() {
            return Err(Error::EmptyCorpus);
        }
        let mut by_id = HashMap::with_capacity(docs.len());
        for (i, doc) in docs.iter().enumerate() {
            validate_document(doc).map_err(|reason| Error::InvalidDocument {
                doc_id: doc.id.clone(),
                reason,
            })?;
            if let Some(first) = by_id.insert(doc.id.clone(), i) {
                return Err(Error::DuplicateId {
                    id: doc.id.clone(),
                    first_line: first + 1,
                    line: i + 1,
                });
            }
        }
        Ok(Self { docs, by_id })
    }

    pub fn len(&self) -> usize {
        self.docs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.docs.is_empty()
    }

    pub fn documents(&self) -> &[Document] {
        &self.docs
    }

    pub fn get(&self, id: &str) -> Option<&Document> {
        self.by_id.get(id).map(|&i| &self.docs[i])
    }

    pub fn contains(&self, id: &str) -> bool {
        self.by_id.contains_key(id)
    }

    pub fn write_jsonl(&self, path: &Path) -> Result<()> {
        write_jsonl(path, &self.docs)
    }
}

fn validate_document(doc: &Document) -> std::result::Result<(), String> {
    if doc.id.is_empty() {
        return Err("document id is empty".into());
    }
    if doc.text.is_empty() {
        return Err(format!("document {:?} has empty text", doc.id));
    }
    Ok(())
}

/// Ordered, non-empty list of non-blank sub-queries.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<String>", into = "Vec<String>")]
pub struct SubQuerySet(Vec<String>);

impl SubQuerySet {
    pub fn new<I, T>(sub_queries: I) -> Result<Self>
    where
        I: IntoIterator<Item = T>,
        T: Into<String>,
    {
        let subs: Vec<String> = sub_queries.into_iter().map(Into::into).collect();
        if subs.is_empty() {
            return Err(Error::InvalidSubQuerySet("no sub-queries".into()));
        }
        if let Some(i) = subs.iter().position(|s| s.trim().is_empty()) {
            return Err(Error::InvalidSubQuerySet(format!("sub-query {i} is blank")));
        }
        Ok(Self(subs))
    }

    pub fn single(query: impl Into<String>) -> Result<Self> {
        Self::new([query.into()])
    }

    /// Parses newline-separated sub-queries; `None` when the text is not a
    /// well-formed set of `1..=m_max` non-empty lines.
    pub fn parse(text: &str, m_max: usize) -> Option<Self> {
        let lines: Vec<&str> = text.lines().collect();
        if lines.is_empty() || lines.len() > m_max {
            return None;
        }
        if lines.iter().any(|l| l.trim().is_empty()) {
            return None;
        }
        Some(Self(lines.iter().map(|l| l.trim().to_string()).collect()))
    }

    /// Newline-joined text form accepted by [`SubQuerySet::parse`].
    pub fn render(&self) -> String {
        self.0.join("\n")
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[String] {
        &self.0
    }

    pub fn iter(&self) -> std::slice::Iter<'_, String> {
        self.0.iter()
    }

    /// Sub-set selected by the bits of `mask` (bit `i` keeps sub-query `i`).
    pub fn subset(&self, mask: u64) -> Option<Self> {
        let picked: Vec<String> = self
            .0
            .iter()
            .enumerate()
            .filter(|(i, _)| mask >> i & 1 == 1)
            .map(|(_, s)| s.clone())
            .collect();
        (!picked.is_empty()).then_some(Self(picked))
    }
}

impl TryFrom<Vec<String>> for SubQuerySet {
    type Error = Error;

    fn try_from(value: Vec<String>) -> Result<Self> {
        Self::new(value)
    }
}

impl From<SubQuerySet> for Vec<String> {
    fn from(value: SubQuerySet) -> Self {
        value.0
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueryInstance {
    pub id: String,
    pub text: String,
    /// Earlier `(question, answer)` turns, oldest first.
    #[serde(default)]
    pub history: Vec<(String, String)>,
    pub gold_ids: BTreeSet<String>,
    #[serde(default)]
    pub candidates: Vec<SubQuerySet>,
}

impl QueryInstance {
    /// Conversation turn number, 1 for a standalone query.
    pub fn turn(&self) -> usize {
        self.history.len() + 1
    }
}

#[derive(Deserialize)]
struct QueryRecord {
    id: String,
    text: String,
    #[serde(default)]
    history: Vec<(String, String)>,
    gold_ids: Vec<String>,
    #[serde(default)]
    candidates: Vec<Vec<String>>,
}

fn read_records<T, F>(path: &Path, mut each: F) -> Result<usize>
where
    T: for<'de> Deserialize<'de>,
    F: FnMut(usize, T) -> Result<()>,
{
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut count = 0;
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let record: T = serde_json::from_str(&line).map_err(|e| Error::MalformedRecord {
            path: path.to_path_buf(),
            line: i + 1,
            reason: e.to_string(),
        })?;
        each(i + 1, record)?;
        count += 1;
    }
    Ok(count)
}

pub(crate) fn write_jsonl<T: Serialize>(path: &Path, records: &[T]) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    for record in records {
        serde_json::to_writer(&mut out, record).expect("records serialize");
        out.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    }
    out.flush().map_err(|e| Error::io(path, e))
}

/// Loads a line-delimited document file. Duplicate ids and empty files are
/// rejected.
pub fn load_corpus(path: &Path) -> Result<Corpus> {
    let mut docs = Vec::new();
    let mut lines: HashMap<String, usize> = HashMap::new();
    read_records(path, |line, doc: Document| {
        validate_document(&doc).map_err(|reason| Error::MalformedRecord {
            path: path.to_path_buf(),
            line,
            reason,
        })?;
        if let Some(&first_line) = lines.get(&doc.id) {
            return Err(Error::DuplicateId {
                id: doc.id,
                first_line,
                line,
            });
        }
        lines.insert(doc.id.clone(), line);
        docs.push(doc);
        Ok(())
    })?;
    Corpus::from_documents(docs)
}

/// Loads queries and cross-checks every gold id against `corpus`.
pub fn load_queries(path: &Path, corpus: &Corpus) -> Result<Vec<QueryInstance>> {
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    read_records(path, |line, rec: QueryRecord| {
        if rec.id.is_empty() {
            return Err(Error::MalformedRecord {
                path: path.to_path_buf(),
                line,
                reason: "query id is empty".into(),
            });
        }
        if !seen.insert(rec.id.clone()) {
            return Err(Error::InvalidQuery {
                query_id: rec.id,
                reason: format!("duplicate query id (line {line})"),
            });
        }
        if rec.text.trim().is_empty() {
            return Err(Error::InvalidQuery {
                query_id: rec.id,
                reason: "query text is empty".into(),
            });
        }
        if rec.gold_ids.is_empty() {
            return Err(Error::InvalidQuery {
                query_id: rec.id,
                reason: "no gold documents".into(),
            });
        }
        if let Some(missing) = rec.gold_ids.iter().find(|g| !corpus.contains(g)) {
            return Err(Error::DanglingGold {
                query_id: rec.id.clone(),
                doc_id: missing.clone(),
            });
        }
        let candidates = rec
            .candidates
            .into_iter()
            .enumerate()
            .map(|(i, c)| {
                SubQuerySet::new(c).map_err(|e| Error::InvalidQuery {
                    query_id: rec.id.clone(),
                    reason: format!("candidate {i}: {e}"),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        out.push(QueryInstance {
            id: rec.id,
            text: rec.text,
            history: rec.history,
            gold_ids: rec.gold_ids.into_iter().collect(),
            candidates,
        });
        Ok(())
    })?;
    Ok(out)
}

pub fn write_queries(path: &Path, queries: &[QueryInstance]) -> Result<()> {
    write_jsonl(path, queries)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QueryReport {
    pub query_id: String,
    pub gold_count: usize,
    pub candidate_pool_size: usize,
    pub candidate_sizes: Vec<usize>,
    pub history_depth: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ValidationReport {
    pub queries: Vec<QueryReport>,
    pub warnings: Vec<String>,
    pub errors: Vec<String>,
}

impl ValidationReport {
    pub fn is_ready(&self) -> bool {
        self.errors.is_empty()
    }
}

pub fn validate_dataset(corpus: &Corpus, queries: &[QueryInstance]) -> ValidationReport {
    let mut report = ValidationReport::default();
    let mut seen = HashSet::new();
    for q in queries {
        if !seen.insert(q.id.as_str()) {
            report
                .errors
                .push(format!("query {:?}: duplicate id", q.id));
        }
        if q.gold_ids.is_empty() {
            report
                .errors
                .push(format!("query {:?}: no gold documents", q.id));
        }
        for g in q.gold_ids.iter().filter(|g| !corpus.contains(g)) {
            report
                .errors
                .push(format!("query {:?}: gold {g:?} not in corpus", q.id));
        }
        if q.candidates.is_empty() {
            report.warnings.push(format!(
                "query {:?}: no candidate pool; heuristic generation required",
                q.id
            ));
        }
        report.queries.push(QueryReport {
            query_id: q.id.clone(),
            gold_count: q.gold_ids.len(),
            candidate_pool_size: q.candidates.len(),
            candidate_sizes: q.candidates.iter().map(SubQuerySet::len).collect(),
            history_depth: q.history.len(),
        });
    }
    report
}

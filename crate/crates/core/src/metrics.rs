//! Binary-relevance ranking metrics: MRR@K, NDCG@K, Recall@K and MAP@K.
//!
//! Every metric reads only the positions of gold documents in the ranking.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::scalar::Real;

/// 1-based positions of gold documents within the first `k` entries.
fn gold_positions<D: AsRef<str>>(ranking: &[D], gold: &BTreeSet<String>, k: usize) -> Vec<usize> {
    ranking
        .iter()
        .take(k)
        .enumerate()
        .filter(|(_, d)| gold.contains(d.as_ref()))
        .map(|(i, _)| i + 1)
        .collect()
}

pub fn mrr_at_k<S: Real, D: AsRef<str>>(ranking: &[D], gold: &BTreeSet<String>, k: usize) -> S {
    gold_positions(ranking, gold, k)
        .first()
        .map_or(S::zero(), |&r| S::one() / S::from_usize(r))
}

fn discount<S: Real>(rank: usize) -> S {
    S::one() / (S::from_usize(rank) + S::one()).log2()
}

pub fn ndcg_at_k<S: Real, D: AsRef<str>>(ranking: &[D], gold: &BTreeSet<String>, k: usize) -> S {
    let ideal_hits = gold.len().min(k);
    if ideal_hits == 0 {
        return S::zero();
    }
    let dcg = gold_positions(ranking, gold, k)
        .into_iter()
        .fold(S::zero(), |acc, r| acc + discount::<S>(r));
    let idcg = (1..=ideal_hits).fold(S::zero(), |acc, r| acc + discount::<S>(r));
    dcg / idcg
}

pub fn recall_at_k<S: Real, D: AsRef<str>>(ranking: &[D], gold: &BTreeSet<String>, k: usize) -> S {
    if gold.is_empty() {
        return S::zero();
    }
    S::from_usize(gold_positions(ranking, gold, k).len()) / S::from_usize(gold.len())
}

/// Average precision normalised by the total number of golds.
pub fn map_at_k<S: Real, D: AsRef<str>>(ranking: &[D], gold: &BTreeSet<String>, k: usize) -> S {
    if gold.is_empty() {
        return S::zero();
    }
    let sum = gold_positions(ranking, gold, k)
        .into_iter()
        .enumerate()
        .fold(S::zero(), |acc, (hits_before, r)| {
            acc + S::from_usize(hits_before + 1) / S::from_usize(r)
        });
    sum / S::from_usize(gold.len())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Metric {
    Mrr,
    Ndcg,
    Recall,
    Map,
}

impl Metric {
    pub const ALL: [Metric; 4] = [Metric::Mrr, Metric::Ndcg, Metric::Recall, Metric::Map];

    pub fn label(self, k: usize) -> String {
        match self {
            Metric::Mrr => format!("MRR@{k}"),
            Metric::Ndcg => format!("NDCG@{k}"),
            Metric::Recall => format!("R@{k}"),
            Metric::Map => format!("MAP@{k}"),
        }
    }

    pub fn compute<S: Real, D: AsRef<str>>(
        self,
        ranking: &[D],
        gold: &BTreeSet<String>,
        k: usize,
    ) -> S {
        match self {
            Metric::Mrr => mrr_at_k(ranking, gold, k),
            Metric::Ndcg => ndcg_at_k(ranking, gold, k),
            Metric::Recall => recall_at_k(ranking, gold, k),
            Metric::Map => map_at_k(ranking, gold, k),
        }
    }
}

/// Which metrics to compute at which cutoffs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MetricSpec {
    pub metric: Metric,
    pub k: usize,
}

impl MetricSpec {
    pub fn label(&self) -> String {
        self.metric.label(self.k)
    }
}

/// Default table columns: MRR@3, NDCG@3, R@10, R@100, MAP@10.
pub fn default_metric_specs() -> Vec<MetricSpec> {
    vec![
        MetricSpec {
            metric: Metric::Mrr,
            k: 3,
        },
        MetricSpec {
            metric: Metric::Ndcg,
            k: 3,
        },
        MetricSpec {
            metric: Metric::Recall,
            k: 10,
        },
        MetricSpec {
            metric: Metric::Recall,
            k: 100,
        },
        MetricSpec {
            metric: Metric::Map,
            k: 10,
        },
    ]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryEval {
    pub query_id: String,
    pub values: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalResult {
    pub label: String,
    /// Column order of the table.
    pub columns: Vec<String>,
    pub means: BTreeMap<String, f64>,
    pub per_query: Vec<QueryEval>,
}

/// Evaluates pre-computed rankings. `rankings` pairs each query id and its
/// gold set with the ranked document ids.
pub fn evaluate<'a, I>(label: &str, specs: &[MetricSpec], rankings: I) -> EvalResult
where
    I: IntoIterator<Item = (&'a str, &'a BTreeSet<String>, Vec<String>)>,
{
    let columns: Vec<String> = specs.iter().map(MetricSpec::label).collect();
    let mut per_query = Vec::new();
    for (query_id, gold, ranking) in rankings {
        let values = specs
            .iter()
            .map(|s| (s.label(), s.metric.compute::<f64, _>(&ranking, gold, s.k)))
            .collect();
        per_query.push(QueryEval {
            query_id: query_id.to_string(),
            values,
        });
    }
    let means = columns
        .iter()
        .map(|c| {
            let mean = if per_query.is_empty() {
                0.0
            } else {
                per_query.iter().map(|q| q.values[c]).sum::<f64>() / per_query.len() as f64
            };
            (c.clone(), mean)
        })
        .collect();
    EvalResult {
        label: label.to_string(),
        columns,
        means,
        per_query,
    }
}

/// Aligned plain-text table, one row per result, values in percent.
pub fn format_table(results: &[EvalResult]) -> String {
    let mut columns: Vec<String> = Vec::new();
    for r in results {
        for c in &r.columns {
            if !columns.contains(c) {
                columns.push(c.clone());
            }
        }
    }
    let label_width = results
        .iter()
        .map(|r| r.label.len())
        .chain(std::iter::once("Method".len()))
        .max()
        .unwrap_or(6);
    let widths: Vec<usize> = columns.iter().map(|c| c.len().max(6)).collect();
    let mut out = format!("{:<label_width$}", "Method");
    for (c, w) in columns.iter().zip(&widths) {
        out.push_str(&format!("  {c:>w$}"));
    }
    out.push('\n');
    for r in results {
        out.push_str(&format!("{:<label_width$}", r.label));
        for (c, w) in columns.iter().zip(&widths) {
            match r.means.get(c) {
                Some(v) => out.push_str(&format!("  {:>w$.1}", v * 100.0)),
                None => out.push_str(&format!("  {:>w$}", "-")),
            }
        }
        out.push('\n');
    }
    out
}

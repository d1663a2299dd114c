//! Merging per-sub-query ranked lists into one ranking.
//!
//! Rank-Score Fusion collects, for every document, its `(score, rank)`
//! appearances across the `M` lists and computes
//!
//! ```text
//! P(p) = 1 / Σ_j 1/r_j        (harmonic rank aggregate, lower is better)
//! S(p) = max_j s_j            (strongest raw score)
//! ```
//!
//! Documents are ordered by `P` ascending, then `S` descending, then id.
//! The `P` comparison uses the exact rational reciprocal-rank sum, so the
//! ordering never depends on floating-point summation order.
//!
//! Reciprocal Rank Fusion is kept as the baseline.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::retrieval::RankedList;
use crate::scalar::Scalar;

pub const DEFAULT_RRF_SMOOTHING: f64 = 60.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Appearance<S> {
    pub list_index: usize,
    pub score: S,
    pub rank: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FusionStats<S> {
    pub doc_id: String,
    /// Harmonic rank aggregate.
    pub p: S,
    /// Maximum observed score.
    pub s: S,
    pub appearances: Vec<Appearance<S>>,
    reciprocal_sum: BigRational,
}

impl<S: Scalar> FusionStats<S> {
    /// Exact `Σ_j 1/r_j`; `P` is its reciprocal.
    pub fn reciprocal_rank_sum(&self) -> &BigRational {
        &self.reciprocal_sum
    }

    fn rsf_cmp(&self, other: &Self) -> Ordering {
        // Larger reciprocal sum means smaller P.
        other
            .reciprocal_sum
            .cmp(&self.reciprocal_sum)
            .then_with(|| other.s.partial_cmp(&self.s).unwrap_or(Ordering::Equal))
            .then_with(|| self.doc_id.cmp(&other.doc_id))
    }
}

/// Collects per-document appearances and computes `P` and `S`.
pub fn aggregate_stats<S: Scalar>(
    lists: &[RankedList<S>],
) -> Result<BTreeMap<String, FusionStats<S>>> {
    if lists.is_empty() {
        return Err(Error::NoLists);
    }
    let mut apps: BTreeMap<String, Vec<Appearance<S>>> = BTreeMap::new();
    for (list_index, list) in lists.iter().enumerate() {
        list.check_ranks()
            .map_err(|reason| Error::InvalidRankedList {
                list: list_index,
                reason,
            })?;
        for e in list.entries() {
            apps.entry(e.doc_id.clone()).or_default().push(Appearance {
                list_index,
                score: e.score,
                rank: e.rank,
            });
        }
    }
    Ok(apps
        .into_iter()
        .map(|(doc_id, appearances)| {
            let stats = stats_for(doc_id.clone(), appearances);
            (doc_id, stats)
        })
        .collect())
}

fn stats_for<S: Scalar>(doc_id: String, appearances: Vec<Appearance<S>>) -> FusionStats<S> {
    let mut ranks: Vec<usize> = appearances.iter().map(|a| a.rank).collect();
    // Canonical summation order keeps P independent of list order.
    ranks.sort_unstable();
    let inv_sum = ranks
        .iter()
        .fold(S::zero(), |acc, &r| acc + S::one() / S::from_usize(r));
    let reciprocal_sum = ranks.iter().fold(BigRational::zero(), |acc, &r| {
        acc + BigRational::new(BigInt::from(1), BigInt::from(r))
    });
    let s = appearances
        .iter()
        .skip(1)
        .fold(appearances[0].score, |m, a| m.max_of(a.score));
    FusionStats {
        doc_id,
        p: S::one() / inv_sum,
        s,
        appearances,
        reciprocal_sum,
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "lowercase")]
pub enum Fusion {
    /// Rank-Score Fusion.
    #[default]
    Rsf,
    /// Reciprocal Rank Fusion with additive rank smoothing.
    Rrf { smoothing: f64 },
}

impl Fusion {
    pub fn rrf() -> Self {
        Fusion::Rrf {
            smoothing: DEFAULT_RRF_SMOOTHING,
        }
    }

    pub fn fuse<S: Scalar>(
        &self,
        lists: &[RankedList<S>],
        top_k: usize,
    ) -> Result<FusedRanking<S>> {
        match *self {
            Fusion::Rsf => rsf_fuse(lists, top_k),
            Fusion::Rrf { smoothing } => rrf_fuse(lists, top_k, S::from_f64(smoothing)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "S: Deserialize<'de>"))]
pub struct FusedEntry<S> {
    pub doc_id: String,
    pub p: S,
    pub s: S,
    /// Set only for reciprocal rank fusion.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rrf_score: Option<S>,
    pub fused_rank: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FusedRanking<S> {
    pub method: Fusion,
    pub entries: Vec<FusedEntry<S>>,
}

impl<S: Scalar> FusedRanking<S> {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn doc_ids(&self) -> Vec<&str> {
        self.entries.iter().map(|e| e.doc_id.as_str()).collect()
    }

    /// 1-based fused rank of `doc_id`.
    pub fn rank_of(&self, doc_id: &str) -> Option<usize> {
        self.entries
            .iter()
            .find(|e| e.doc_id == doc_id)
            .map(|e| e.fused_rank)
    }
}

fn into_ranking<S: Scalar>(
    method: Fusion,
    sorted: Vec<(FusionStats<S>, Option<S>)>,
    top_k: usize,
) -> FusedRanking<S> {
    let entries = sorted
        .into_iter()
        .take(top_k)
        .enumerate()
        .map(|(i, (st, rrf_score))| FusedEntry {
            doc_id: st.doc_id,
            p: st.p,
            s: st.s,
            rrf_score,
            fused_rank: i + 1,
        })
        .collect();
    FusedRanking { method, entries }
}

/// Top-`top_k` of the union of `lists` under the `(P asc, S desc, id asc)` order.
pub fn rsf_fuse<S: Scalar>(lists: &[RankedList<S>], top_k: usize) -> Result<FusedRanking<S>> {
    if top_k == 0 {
        return Err(Error::ZeroTopK);
    }
    let mut stats: Vec<FusionStats<S>> = aggregate_stats(lists)?.into_values().collect();
    stats.sort_by(|a, b| a.rsf_cmp(b));
    Ok(into_ranking(
        Fusion::Rsf,
        stats.into_iter().map(|s| (s, None)).collect(),
        top_k,
    ))
}

/// Reciprocal Rank Fusion: `Σ_j 1/(smoothing + r_j)` descending, ties by id.
pub fn rrf_fuse<S: Scalar>(
    lists: &[RankedList<S>],
    top_k: usize,
    smoothing: S,
) -> Result<FusedRanking<S>> {
    if top_k == 0 {
        return Err(Error::ZeroTopK);
    }
    if !(smoothing > S::zero()) {
        return Err(Error::config("rrf.smoothing", "must be positive"));
    }
    let mut scored: Vec<(FusionStats<S>, Option<S>)> = aggregate_stats(lists)?
        .into_values()
        .map(|st| {
            let mut ranks: Vec<usize> = st.appearances.iter().map(|a| a.rank).collect();
            ranks.sort_unstable();
            let score = ranks.iter().fold(S::zero(), |acc, &r| {
                acc + S::one() / (smoothing + S::from_usize(r))
            });
            (st, Some(score))
        })
        .collect();
    scored.sort_by(|a, b| {
        b.1.partial_cmp(&a.1)
            .unwrap_or(Ordering::Equal)
            .then_with(|| a.0.doc_id.cmp(&b.0.doc_id))
    });
    Ok(into_ranking(
        Fusion::Rrf {
            smoothing: smoothing.to_f64(),
        },
        scored,
        top_k,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::retrieval::RankedEntry;
    use num_rational::Ratio;

    type Q = Ratio<i64>;

    fn list<S: Scalar>(items: &[(&str, S)]) -> RankedList<S> {
        RankedList::from_ranks(
            "q",
            items
                .iter()
                .enumerate()
                .map(|(i, (d, s))| RankedEntry {
                    doc_id: d.to_string(),
                    score: *s,
                    rank: i + 1,
                })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn single_rank_one_gives_p_one() {
        let stats = aggregate_stats(&[list(&[("a", 0.5)])]).unwrap();
        assert_eq!(stats["a"].p, 1.0);
    }

    #[test]
    fn ranks_two_and_three_give_six_fifths() {
        let l1 = list(&[("x", Q::new(9, 10)), ("a", Q::new(7, 10))]);
        let l2 = list(&[
            ("y", Q::new(9, 10)),
            ("z", Q::new(8, 10)),
            ("a", Q::new(9, 10)),
        ]);
        let stats = aggregate_stats(&[l1, l2]).unwrap();
        assert_eq!(stats["a"].p, Q::new(6, 5));
        assert_eq!(stats["a"].s, Q::new(9, 10));
        assert_eq!(stats["a"].appearances.len(), 2);
    }

    #[test]
    fn max_score_across_lists() {
        let stats = aggregate_stats(&[list(&[("a", 0.7)]), list(&[("a", 0.9)])]).unwrap();
        assert_eq!(stats["a"].s, 0.9);
    }

    #[test]
    fn two_list_example() {
        let l1 = list(&[("A", 0.9), ("B", 0.8)]);
        let l2 = list(&[("B", 0.7), ("C", 0.95)]);
        let fused = rsf_fuse(&[l1.clone(), l2.clone()], 10).unwrap();
        assert_eq!(fused.doc_ids(), vec!["B", "A", "C"]);
        let rrf = rrf_fuse(&[l1, l2], 10, 60.0).unwrap();
        assert_eq!(rrf.doc_ids(), vec!["B", "A", "C"]);
    }

    #[test]
    fn score_breaks_rank_tie() {
        let fused = rsf_fuse(&[list(&[("A", 0.4)]), list(&[("B", 0.9)])], 10).unwrap();
        assert_eq!(fused.doc_ids(), vec!["B", "A"]);
    }

    #[test]
    fn rrf_double_first() {
        let fused = rrf_fuse(
            &[list(&[("a", Q::new(1, 1))]), list(&[("a", Q::new(1, 2))])],
            5,
            Q::from_integer(60),
        )
        .unwrap();
        assert_eq!(fused.entries[0].rrf_score, Some(Q::new(2, 61)));
    }

    #[test]
    fn errors() {
        assert!(matches!(rsf_fuse::<f64>(&[], 3), Err(Error::NoLists)));
        assert!(matches!(
            rsf_fuse(&[list(&[("a", 1.0)])], 0),
            Err(Error::ZeroTopK)
        ));
        assert!(rrf_fuse(&[list(&[("a", 1.0)])], 1, 0.0).is_err());
    }

    #[test]
    fn top_k_truncates() {
        let fused = rsf_fuse(&[list(&[("a", 3.0), ("b", 2.0), ("c", 1.0)])], 2).unwrap();
        assert_eq!(fused.len(), 2);
        assert_eq!(fused.rank_of("b"), Some(2));
        assert_eq!(fused.rank_of("c"), None);
    }

    #[test]
    fn exact_key_resolves_float_near_ties() {
        // 1/2 + 1/3 + 1/6 == 1 exactly, so this document ties on P with a
        // rank-1 singleton and the score decides.
        let l1 = list(&[("x", 5.0), ("t", 4.0)]);
        let l2 = list(&[("y", 5.0), ("z", 4.0), ("t", 3.0)]);
        let l3 = list(&[
            ("a1", 9.0),
            ("a2", 8.0),
            ("a3", 7.0),
            ("a4", 6.0),
            ("a5", 5.5),
            ("t", 5.0),
        ]);
        let stats = aggregate_stats(&[l1.clone(), l2.clone(), l3.clone()]).unwrap();
        assert_eq!(
            stats["t"].reciprocal_rank_sum(),
            &BigRational::from_integer(BigInt::from(1))
        );
        let fused = rsf_fuse(&[l1, l2, l3], 20).unwrap();
        // a1 (P=1, S=9) > x (P=1, S=5) = y (P=1, S=5) > t (P=1, S=5): ids decide.
        assert_eq!(&fused.doc_ids()[..4], &["a1", "t", "x", "y"]);
    }
}

//! Rank-based reward stack.
//!
//! * [`phi`] maps a fused rank to a dense score: `2 - (r-1)/9` on `[1, 10]`,
//!   `(100 - r)/90` on `(10, 100]`, zero beyond.
//! * [`phi_prime`] adds `λ / log2(r + 1)` for ranks `r <= k*`.
//! * [`doc_set_score`] sorts the retrieved gold ranks best-first and sums
//!   `η^i · Φ(r_i)`; a failed format gate pays `δ` instead.
//! * [`stage1_reward`] takes the best score over every non-empty subset of
//!   the sub-queries, [`stage2_reward`] scores the full ensemble with `Φ′`.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::corpus::SubQuerySet;
use crate::error::{Error, Result};
use crate::fusion::{FusedRanking, Fusion};
use crate::retrieval::{RankedList, Retriever};
use crate::scalar::{Real, Scalar};

/// Largest supported subset-enumeration cap (subsets are indexed by `u64`).
pub const MAX_ENUMERATION: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(
    deny_unknown_fields,
    default,
    bound(deserialize = "S: Scalar + Deserialize<'de>")
)]
pub struct RewardConfig<S> {
    /// Decay coefficient η applied as `η^i` to the i-th best gold.
    pub eta: S,
    /// Format penalty δ (negative).
    pub delta: S,
    /// Precision amplification λ of the stage II bonus.
    pub lambda: S,
    /// Critical ranking threshold k*; ranks `<= k*` receive the bonus.
    pub k_star: usize,
    /// Support of Φ; ranks beyond score zero.
    pub rank_cutoff: usize,
    /// Depth `k` of each retrieval and of the fused list.
    pub top_k: usize,
    /// Cap on sub-queries per set, which bounds subset enumeration.
    pub m_max: usize,
}

impl<S: Scalar> RewardConfig<S> {
    /// Conversational-search setting: `η = 1`, `k* = 3`.
    pub fn conversational() -> Self {
        Self {
            eta: S::one(),
            delta: S::zero() - S::one(),
            lambda: S::one(),
            k_star: 3,
            rank_cutoff: 100,
            top_k: 100,
            m_max: 6,
        }
    }

    /// Multi-hop setting: `η = 0.6`, `k* = 0`.
    pub fn multi_hop() -> Self {
        Self {
            eta: S::from_usize(3) / S::from_usize(5),
            k_star: 0,
            ..Self::conversational()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eta > S::zero() && self.eta <= S::one()) {
            return Err(Error::config("reward.eta", "must lie in (0, 1]"));
        }
        if !(self.delta < S::zero()) {
            return Err(Error::config("reward.delta", "must be negative"));
        }
        if !(self.lambda >= S::zero()) {
            return Err(Error::config("reward.lambda", "must be >= 0"));
        }
        if self.rank_cutoff <= 10 {
            return Err(Error::config("reward.rank_cutoff", "must exceed 10"));
        }
        if self.top_k == 0 {
            return Err(Error::config("reward.top_k", "must be at least 1"));
        }
        if self.m_max == 0 || self.m_max > MAX_ENUMERATION {
            return Err(Error::config(
                "reward.m_max",
                format!("must lie in 1..={MAX_ENUMERATION}"),
            ));
        }
        Ok(())
    }
}

impl<S: Scalar> Default for RewardConfig<S> {
    fn default() -> Self {
        Self::conversational()
    }
}

/// Continuous piecewise-linear rank map.
///
/// The breakpoint sits at `rank_cutoff / 10` (10 for the default cutoff of
/// 100); ranks `1..=breakpoint` map linearly onto `[2, 1]`, ranks up to the
/// cutoff onto `[1, 0)`.
pub fn phi<S: Scalar>(rank: usize, rank_cutoff: usize) -> Result<S> {
    if rank == 0 {
        return Err(Error::ZeroRank);
    }
    Ok(phi_unchecked(rank, rank_cutoff))
}

fn phi_unchecked<S: Scalar>(rank: usize, rank_cutoff: usize) -> S {
    let r = S::from_usize(rank);
    let cutoff = S::from_usize(rank_cutoff);
    let knee = cutoff / S::from_usize(10);
    let one = S::one();
    if r <= knee {
        (one + one) - (r - one) / (knee - one)
    } else if rank <= rank_cutoff {
        (cutoff - r) / (cutoff - knee)
    } else {
        S::zero()
    }
}

/// `Φ(r) + λ·[r <= k*] / log2(r + 1)`.
pub fn phi_prime<S: Real>(rank: usize, config: &RewardConfig<S>) -> Result<S> {
    let base: S = phi(rank, config.rank_cutoff)?;
    if rank <= config.k_star {
        let bonus = config.lambda / (S::from_usize(rank) + S::one()).log2();
        Ok(base + bonus)
    } else {
        Ok(base)
    }
}

/// Fused rank of each gold document, `None` when it was not retrieved.
/// Entries follow the sorted order of the gold ids.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GoldRanks {
    pub ranks: Vec<Option<usize>>,
}

impl GoldRanks {
    /// Retrieved ranks, best first.
    pub fn present_sorted(&self) -> Vec<usize> {
        let mut present: Vec<usize> = self.ranks.iter().flatten().copied().collect();
        present.sort_unstable();
        present
    }
}

pub fn locate_golds<S: Scalar>(
    fused: &FusedRanking<S>,
    gold_ids: &BTreeSet<String>,
) -> Result<GoldRanks> {
    if gold_ids.is_empty() {
        return Err(Error::NoGolds);
    }
    Ok(GoldRanks {
        ranks: gold_ids.iter().map(|g| fused.rank_of(g)).collect(),
    })
}

/// `Σ_i η^i · score(r_i)` over retrieved golds sorted ascending by rank.
pub fn decayed_sum<S: Scalar>(gold: &GoldRanks, eta: S, score: impl Fn(usize) -> S) -> S {
    let mut weight = S::one();
    let mut total = S::zero();
    for r in gold.present_sorted() {
        weight = weight * eta;
        total = total + weight * score(r);
    }
    total
}

/// Format-gated total with Φ. Exact for rational scalars.
pub fn doc_set_score_phi<S: Scalar>(
    gold: &GoldRanks,
    config: &RewardConfig<S>,
    format_ok: bool,
) -> S {
    if !format_ok {
        return config.delta;
    }
    decayed_sum(gold, config.eta, |r| phi_unchecked(r, config.rank_cutoff))
}

/// Format-gated total with Φ or, when `use_phi_prime`, Φ′.
pub fn doc_set_score<S: Real>(
    gold: &GoldRanks,
    config: &RewardConfig<S>,
    format_ok: bool,
    use_phi_prime: bool,
) -> S {
    if !use_phi_prime {
        return doc_set_score_phi(gold, config, format_ok);
    }
    if !format_ok {
        return config.delta;
    }
    decayed_sum(gold, config.eta, |r| {
        phi_prime(r, config).expect("located ranks are 1-based")
    })
}

/// True iff `raw` is `1..=m_max` newline-separated non-empty sub-queries.
pub fn format_gate(raw: &str, m_max: usize) -> bool {
    SubQuerySet::parse(raw, m_max).is_some()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Stage1Outcome<S> {
    pub reward: S,
    pub best_subset: SubQuerySet,
    /// Bit `i` set when sub-query `i` belongs to `best_subset`.
    pub best_mask: u64,
}

fn retrieve_all<S, R>(subs: &SubQuerySet, retriever: &R, top_k: usize) -> Result<Vec<RankedList<S>>>
where
    S: Real,
    R: Retriever<S> + ?Sized,
{
    subs.iter().map(|q| retriever.search(q, top_k)).collect()
}

/// Non-empty subset masks of `m` items ordered by cardinality, then
/// lexicographically by member indices.
pub fn subset_masks(m: usize) -> Vec<u64> {
    let mut masks: Vec<u64> = (1..(1u64 << m)).collect();
    masks.sort_by_key(|&mask| {
        let members: Vec<usize> = (0..m).filter(|i| mask >> i & 1 == 1).collect();
        (members.len(), members)
    });
    masks
}

fn score_lists<S: Real>(
    lists: &[RankedList<S>],
    fusion: Fusion,
    gold_ids: &BTreeSet<String>,
    config: &RewardConfig<S>,
    use_phi_prime: bool,
) -> Result<S> {
    let fused = fusion.fuse(lists, config.top_k)?;
    let gold = locate_golds(&fused, gold_ids)?;
    Ok(doc_set_score(&gold, config, true, use_phi_prime))
}

/// Best Φ-score over all non-empty subsets of `sub_queries`, each subset's
/// lists fused with `fusion`. Ties go to the smallest, then lexicographically
/// first, subset.
pub fn stage1_reward<S, R>(
    sub_queries: &SubQuerySet,
    retriever: &R,
    fusion: Fusion,
    gold_ids: &BTreeSet<String>,
    config: &RewardConfig<S>,
) -> Result<Stage1Outcome<S>>
where
    S: Real,
    R: Retriever<S> + ?Sized,
{
    let m = sub_queries.len();
    if m > config.m_max || m > MAX_ENUMERATION {
        return Err(Error::TooManySubQueries {
            got: m,
            cap: config.m_max.min(MAX_ENUMERATION),
        });
    }
    let lists = retrieve_all(sub_queries, retriever, config.top_k)?;
    let mut best: Option<(S, u64)> = None;
    for mask in subset_masks(m) {
        let picked: Vec<RankedList<S>> = lists
            .iter()
            .enumerate()
            .filter(|(i, _)| mask >> i & 1 == 1)
            .map(|(_, l)| l.clone())
            .collect();
        let score = score_lists(&picked, fusion, gold_ids, config, false)?;
        if best.is_none_or(|(b, _)| score > b) {
            best = Some((score, mask));
        }
    }
    let (reward, best_mask) = best.expect("at least one non-empty subset");
    Ok(Stage1Outcome {
        reward,
        best_subset: sub_queries.subset(best_mask).expect("non-empty mask"),
        best_mask,
    })
}

/// Φ′-score of the full ensemble.
pub fn stage2_reward<S, R>(
    sub_queries: &SubQuerySet,
    retriever: &R,
    fusion: Fusion,
    gold_ids: &BTreeSet<String>,
    config: &RewardConfig<S>,
) -> Result<S>
where
    S: Real,
    R: Retriever<S> + ?Sized,
{
    let lists = retrieve_all(sub_queries, retriever, config.top_k)?;
    score_lists(&lists, fusion, gold_ids, config, true)
}

/// Φ-score of the full ensemble (the stage I objective restricted to the
/// full set).
pub fn full_set_score<S, R>(
    sub_queries: &SubQuerySet,
    retriever: &R,
    fusion: Fusion,
    gold_ids: &BTreeSet<String>,
    config: &RewardConfig<S>,
) -> Result<S>
where
    S: Real,
    R: Retriever<S> + ?Sized,
{
    let lists = retrieve_all(sub_queries, retriever, config.top_k)?;
    score_lists(&lists, fusion, gold_ids, config, false)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Stage {
    #[serde(rename = "I")]
    Explore,
    #[serde(rename = "II")]
    Converge,
}

impl std::fmt::Display for Stage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Stage::Explore => "I",
            Stage::Converge => "II",
        })
    }
}

/// Scores a raw policy output: the format gate first, then the stage reward.
pub fn score_action<S, R>(
    raw: &str,
    stage: Stage,
    retriever: &R,
    fusion: Fusion,
    gold_ids: &BTreeSet<String>,
    config: &RewardConfig<S>,
) -> Result<S>
where
    S: Real,
    R: Retriever<S> + ?Sized,
{
    let Some(subs) = SubQuerySet::parse(raw, config.m_max) else {
        return Ok(config.delta);
    };
    match stage {
        Stage::Explore => Ok(stage1_reward(&subs, retriever, fusion, gold_ids, config)?.reward),
        Stage::Converge => stage2_reward(&subs, retriever, fusion, gold_ids, config),
    }
}

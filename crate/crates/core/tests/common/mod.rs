//! Brute-force reference implementations shared by the integration tests.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use acqo::retrieval::{RankedEntry, RankedList};
use num_rational::Ratio;
use rand::seq::SliceRandom;
use rand::Rng;

/// Random list over `pool`: distinct documents, arbitrary scores drawn
/// from a small grid so ties are common.
pub fn random_list<R: Rng>(rng: &mut R, pool: &[String], max_len: usize) -> RankedList<f64> {
    let len = rng.random_range(0..=max_len.min(pool.len()));
    let mut docs = pool.to_vec();
    docs.shuffle(rng);
    let entries = docs
        .into_iter()
        .take(len)
        .enumerate()
        .map(|(i, doc_id)| RankedEntry {
            doc_id,
            score: rng.random_range(0..8) as f64 / 8.0,
            rank: i + 1,
        })
        .collect();
    RankedList::from_ranks("q", entries).unwrap()
}

pub fn doc_pool(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("d{i:02}")).collect()
}

/// Materialises `(P, S, doc_id)` for every document and sorts the tuples.
/// `P` is kept as an exact fraction.
pub fn rsf_oracle(lists: &[RankedList<f64>], top_k: usize) -> Vec<(String, Ratio<i128>, f64)> {
    let mut acc: BTreeMap<String, (Ratio<i128>, f64)> = BTreeMap::new();
    for list in lists {
        for e in list.entries() {
            let slot = acc
                .entry(e.doc_id.clone())
                .or_insert((Ratio::from_integer(0), f64::NEG_INFINITY));
            slot.0 += Ratio::new(1, e.rank as i128);
            slot.1 = slot.1.max(e.score);
        }
    }
    let mut tuples: Vec<(String, Ratio<i128>, f64)> = acc
        .into_iter()
        .map(|(d, (inv, s))| (d, inv.recip(), s))
        .collect();
    tuples.sort_by(|a, b| {
        a.1.cmp(&b.1)
            .then(b.2.partial_cmp(&a.2).unwrap())
            .then(a.0.cmp(&b.0))
    });
    tuples.truncate(top_k);
    tuples
}

pub fn ratio_to_f64(r: Ratio<i128>) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

fn relevant(ranking: &[String], gold: &BTreeSet<String>, k: usize) -> Vec<bool> {
    ranking.iter().take(k).map(|d| gold.contains(d)).collect()
}

pub fn mrr(ranking: &[String], gold: &BTreeSet<String>, k: usize) -> f64 {
    for (i, hit) in relevant(ranking, gold, k).into_iter().enumerate() {
        if hit {
            return 1.0 / (i + 1) as f64;
        }
    }
    0.0
}

pub fn ndcg(ranking: &[String], gold: &BTreeSet<String>, k: usize) -> f64 {
    let dcg: f64 = relevant(ranking, gold, k)
        .into_iter()
        .enumerate()
        .filter(|(_, hit)| *hit)
        .map(|(i, _)| 1.0 / ((i + 2) as f64).log2())
        .sum();
    let ideal: f64 = (0..gold.len().min(k))
        .map(|i| 1.0 / ((i + 2) as f64).log2())
        .sum();
    if ideal == 0.0 {
        0.0
    } else {
        dcg / ideal
    }
}

pub fn recall(ranking: &[String], gold: &BTreeSet<String>, k: usize) -> f64 {
    let hits = relevant(ranking, gold, k)
        .into_iter()
        .filter(|h| *h)
        .count();
    hits as f64 / gold.len() as f64
}

pub fn average_precision(ranking: &[String], gold: &BTreeSet<String>, k: usize) -> f64 {
    let mut hits = 0;
    let mut total = 0.0;
    for (i, hit) in relevant(ranking, gold, k).into_iter().enumerate() {
        if hit {
            hits += 1;
            total += hits as f64 / (i + 1) as f64;
        }
    }
    total / gold.len() as f64
}

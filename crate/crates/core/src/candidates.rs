//! Heuristic candidate pools standing in for a learned query rewriter.

use crate::corpus::{QueryInstance, SubQuerySet};
use crate::text::{is_stopword, tokenize};

/// Deterministic pool of sub-query sets for `query`.
///
/// File-provided candidates come first, followed by: the raw query; the
/// history-concatenated query (multi-turn only); a per-question split when
/// the text holds several questions; a conjunction/enumeration split on
/// `and`, commas and `respectively`; a keyword-only variant. Each split is
/// capped at `m_max` parts and duplicates are dropped.
pub fn generate_candidates(query: &QueryInstance, m_max: usize) -> Vec<SubQuerySet> {
    let mut pool: Vec<SubQuerySet> = Vec::new();
    let mut push = |set: Option<SubQuerySet>| {
        if let Some(set) = set {
            if !pool.contains(&set) {
                pool.push(set);
            }
        }
    };
    for c in &query.candidates {
        push(Some(c.clone()));
    }
    let text = query.text.trim();
    if text.is_empty() {
        return pool;
    }
    push(SubQuerySet::single(text).ok());
    if !query.history.is_empty() {
        let mut parts: Vec<&str> = Vec::new();
        for (q, a) in &query.history {
            parts.push(q.trim());
            parts.push(a.trim());
        }
        parts.push(text);
        let joined = parts
            .into_iter()
            .filter(|p| !p.is_empty())
            .collect::<Vec<_>>()
            .join(" ");
        push(SubQuerySet::single(joined).ok());
    }
    push(question_split(text, m_max));
    push(conjunction_split(text, m_max));
    push(keyword_variant(text));
    pool
}

fn cap_parts(mut parts: Vec<String>, m_max: usize) -> Vec<String> {
    if m_max > 0 && parts.len() > m_max {
        let tail = parts.split_off(m_max - 1).join(" ");
        parts.push(tail);
    }
    parts
}

fn multi(parts: Vec<String>, m_max: usize) -> Option<SubQuerySet> {
    if parts.len() < 2 {
        return None;
    }
    SubQuerySet::new(cap_parts(parts, m_max)).ok()
}

fn question_split(text: &str, m_max: usize) -> Option<SubQuerySet> {
    let parts: Vec<String> = text
        .split('?')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(|p| format!("{p}?"))
        .collect();
    multi(parts, m_max)
}

fn strip_words(text: &str, drop: &[&str]) -> Vec<String> {
    text.split_whitespace()
        .map(|w| w.trim_matches(|c: char| !c.is_alphanumeric()).to_string())
        .filter(|w| !w.is_empty() && !drop.iter().any(|d| w.eq_ignore_ascii_case(d)))
        .collect()
}

/// Splits "X of A and B, respectively" style enumerations. Short trailing
/// parts borrow the leading context of the first part, so
/// "shipments in 2022 and 2023" becomes "shipments in 2022" and
/// "shipments in 2023".
fn conjunction_split(text: &str, m_max: usize) -> Option<SubQuerySet> {
    let mut segments: Vec<Vec<String>> = Vec::new();
    for comma_part in text.split([',', ';', '?']) {
        let words = strip_words(comma_part, &["respectively"]);
        let mut current: Vec<String> = Vec::new();
        for w in words {
            if w.eq_ignore_ascii_case("and") {
                if !current.is_empty() {
                    segments.push(std::mem::take(&mut current));
                }
            } else {
                current.push(w);
            }
        }
        if !current.is_empty() {
            segments.push(current);
        }
    }
    if segments.len() < 2 {
        return None;
    }
    let head = segments[0].clone();
    let parts: Vec<String> = segments
        .into_iter()
        .enumerate()
        .map(|(i, seg)| {
            if i > 0 && seg.len() < head.len() && is_fragment(&seg) {
                let keep = head.len() - seg.len();
                head[..keep]
                    .iter()
                    .chain(seg.iter())
                    .cloned()
                    .collect::<Vec<_>>()
                    .join(" ")
            } else {
                seg.join(" ")
            }
        })
        .collect();
    multi(parts, m_max)
}

/// A short part with no function words reads as an enumerated item rather
/// than a standalone clause.
fn is_fragment(words: &[String]) -> bool {
    words.len() <= 3 && words.iter().all(|w| !is_stopword(&w.to_lowercase()))
}

fn keyword_variant(text: &str) -> Option<SubQuerySet> {
    let kept: Vec<String> = tokenize(text)
        .into_iter()
        .filter(|t| !is_stopword(t))
        .collect();
    if kept.is_empty() {
        return None;
    }
    SubQuerySet::single(kept.join(" ")).ok()
}

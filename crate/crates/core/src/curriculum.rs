//! Learning-complexity scoring and the stage II curriculum filter.
//!
//! `τ(q)` is the mean stage I reward over `K` rollouts of the frozen stage I
//! policy; the curriculum keeps exactly the queries with `τ(q) <= τ_thres`.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::corpus::SubQuerySet;
use crate::error::{Error, Result};
use crate::policy::{rollout_rng, PolicyState, RngPurpose};
use crate::scalar::{Real, Scalar};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexityRecord<S> {
    pub query_id: String,
    pub rollout_rewards: Vec<S>,
    pub tau: S,
}

impl<S: Scalar> ComplexityRecord<S> {
    pub fn from_rewards(query_id: impl Into<String>, rollout_rewards: Vec<S>) -> Result<Self> {
        if rollout_rewards.is_empty() {
            return Err(Error::NoRollouts);
        }
        let sum = rollout_rewards.iter().fold(S::zero(), |acc, &r| acc + r);
        let tau = sum / S::from_usize(rollout_rewards.len());
        Ok(Self {
            query_id: query_id.into(),
            rollout_rewards,
            tau,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(
    deny_unknown_fields,
    default,
    bound(deserialize = "S: Scalar + Deserialize<'de>")
)]
pub struct CurriculumConfig<S> {
    /// Retention threshold τ_thres (inclusive).
    pub tau_thres: S,
    /// Rollouts per query K.
    pub k: usize,
}

impl<S: Scalar> Default for CurriculumConfig<S> {
    /// `τ_thres = 5/3`, `K = 8`.
    fn default() -> Self {
        Self {
            tau_thres: S::from_usize(5) / S::from_usize(3),
            k: 8,
        }
    }
}

impl<S: Scalar> CurriculumConfig<S> {
    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::config("curriculum.k", "must be at least 1"));
        }
        Ok(())
    }
}

/// Samples `k` rollouts of the (frozen) policy for `query_id` and averages
/// their rewards. The draw sequence is fixed by `seed`.
pub fn complexity_score<S, F>(
    query_id: &str,
    policy: &PolicyState<S>,
    mut reward_fn: F,
    k: usize,
    seed: u64,
) -> Result<ComplexityRecord<S>>
where
    S: Real,
    F: FnMut(usize, &SubQuerySet) -> Result<S>,
{
    if k == 0 {
        return Err(Error::config("curriculum.k", "must be at least 1"));
    }
    let mut rng = rollout_rng(seed, RngPurpose::Complexity, 0, query_id);
    let mut rewards = Vec::with_capacity(k);
    for _ in 0..k {
        let draw = policy.sample(query_id, &mut rng)?;
        rewards.push(reward_fn(draw.index, &draw.sub_queries)?);
    }
    ComplexityRecord::from_rewards(query_id, rewards)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurriculumSummary {
    pub retained: usize,
    pub total: usize,
    pub tau_thres: f64,
    #[serde(rename = "K")]
    pub k: usize,
    pub retained_fraction: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Curriculum {
    pub query_ids: BTreeSet<String>,
    pub summary: CurriculumSummary,
    pub warnings: Vec<String>,
}

/// Keeps `{q : τ(q) <= τ_thres}`.
pub fn build_curriculum<S: Scalar>(
    records: &[ComplexityRecord<S>],
    config: &CurriculumConfig<S>,
) -> Curriculum {
    let query_ids: BTreeSet<String> = records
        .iter()
        .filter(|r| r.tau <= config.tau_thres)
        .map(|r| r.query_id.clone())
        .collect();
    let total = records.len();
    let retained = query_ids.len();
    let mut warnings = Vec::new();
    if total == 0 {
        warnings.push("no complexity records; curriculum is empty".to_string());
    } else if retained == 0 {
        warnings.push(format!(
            "every one of {total} queries has tau above {:?}; curriculum is empty",
            config.tau_thres
        ));
    }
    Curriculum {
        query_ids,
        summary: CurriculumSummary {
            retained,
            total,
            tau_thres: config.tau_thres.to_f64(),
            k: config.k,
            retained_fraction: if total == 0 {
                0.0
            } else {
                retained as f64 / total as f64
            },
        },
        warnings,
    }
}

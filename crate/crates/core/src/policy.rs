//! Desk-scale policy harness.
//!
//! Each training query owns a categorical distribution over its candidate
//! pool, `softmax(logits / temperature)`. Training samples `K` rollouts per
//! query, scores them with the stage reward, and applies the score-function
//! gradient with a group-mean baseline.

use std::collections::{BTreeMap, BTreeSet};
use std::hash::Hasher;
use std::path::Path;

use fnv::FnvHasher;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::candidates::generate_candidates;
use crate::corpus::{QueryInstance, SubQuerySet};
use crate::error::{Error, Result};
use crate::fusion::Fusion;
use crate::retrieval::Retriever;
use crate::reward::{format_gate, stage1_reward, stage2_reward, RewardConfig, Stage};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RngPurpose {
    Train(Stage),
    Complexity,
}

/// Independent random stream for one `(purpose, iteration, query)` triple,
/// so rollouts do not depend on scheduling order.
pub fn rollout_rng(seed: u64, purpose: RngPurpose, iteration: usize, query_id: &str) -> ChaCha8Rng {
    let mut h = FnvHasher::default();
    h.write_u64(seed);
    h.write_u8(match purpose {
        RngPurpose::Train(Stage::Explore) => 1,
        RngPurpose::Train(Stage::Converge) => 2,
        RngPurpose::Complexity => 3,
    });
    h.write_u64(iteration as u64);
    h.write(query_id.as_bytes());
    ChaCha8Rng::seed_from_u64(h.finish())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Draw<S> {
    pub index: usize,
    pub sub_queries: SubQuerySet,
    pub log_prob: S,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rollout<S> {
    pub query_id: String,
    pub candidate_index: usize,
    pub log_prob: S,
    pub reward: S,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyState<S> {
    pub logits: BTreeMap<String, Vec<S>>,
    pub pools: BTreeMap<String, Vec<SubQuerySet>>,
    pub learning_rate: S,
    pub temperature: S,
    pub seed: u64,
}

fn softmax<S: Real>(logits: &[S], temperature: S) -> Vec<S> {
    let scaled: Vec<S> = logits.iter().map(|&l| l / temperature).collect();
    let max = scaled
        .iter()
        .copied()
        .fold(S::neg_infinity(), |a, b| if b > a { b } else { a });
    let exps: Vec<S> = scaled.iter().map(|&x| (x - max).exp()).collect();
    let z = exps.iter().fold(S::zero(), |a, &b| a + b);
    exps.into_iter().map(|e| e / z).collect()
}

impl<S: Real> PolicyState<S> {
    /// Uniform policy over the given pools.
    pub fn new(
        pools: BTreeMap<String, Vec<SubQuerySet>>,
        learning_rate: S,
        temperature: S,
        seed: u64,
    ) -> Result<Self> {
        if !(learning_rate > S::zero()) {
            return Err(Error::config("policy.learning_rate", "must be positive"));
        }
        if !(temperature > S::zero()) {
            return Err(Error::config("policy.temperature", "must be positive"));
        }
        if let Some((id, _)) = pools.iter().find(|(_, p)| p.is_empty()) {
            return Err(Error::NoCandidates(id.clone()));
        }
        let logits = pools
            .iter()
            .map(|(id, p)| (id.clone(), vec![S::zero(); p.len()]))
            .collect();
        Ok(Self {
            logits,
            pools,
            learning_rate,
            temperature,
            seed,
        })
    }

    /// Builds pools with [`generate_candidates`] for every query.
    pub fn for_queries(
        queries: &[QueryInstance],
        m_max: usize,
        learning_rate: S,
        temperature: S,
        seed: u64,
    ) -> Result<Self> {
        let pools = queries
            .iter()
            .map(|q| (q.id.clone(), generate_candidates(q, m_max)))
            .collect();
        Self::new(pools, learning_rate, temperature, seed)
    }

    pub fn pool(&self, query_id: &str) -> Result<&[SubQuerySet]> {
        self.pools
            .get(query_id)
            .map(Vec::as_slice)
            .ok_or_else(|| Error::UnknownQuery(query_id.to_string()))
    }

    pub fn probabilities(&self, query_id: &str) -> Result<Vec<S>> {
        let logits = self
            .logits
            .get(query_id)
            .ok_or_else(|| Error::UnknownQuery(query_id.to_string()))?;
        Ok(softmax(logits, self.temperature))
    }

    /// Draws a candidate by inverse CDF.
    pub fn sample<R: Rng + ?Sized>(&self, query_id: &str, rng: &mut R) -> Result<Draw<S>> {
        let probs = self.probabilities(query_id)?;
        let u = S::from_f64(rng.random::<f64>());
        let mut acc = S::zero();
        let mut index = probs.len() - 1;
        for (i, &p) in probs.iter().enumerate() {
            acc = acc + p;
            if u < acc {
                index = i;
                break;
            }
        }
        Ok(Draw {
            index,
            sub_queries: self.pools[query_id][index].clone(),
            log_prob: probs[index].ln(),
        })
    }

    /// Most probable candidate, lowest index on ties.
    pub fn greedy(&self, query_id: &str) -> Result<(usize, &SubQuerySet)> {
        let logits = self
            .logits
            .get(query_id)
            .ok_or_else(|| Error::UnknownQuery(query_id.to_string()))?;
        let mut best = 0;
        for (i, &l) in logits.iter().enumerate() {
            if l > logits[best] {
                best = i;
            }
        }
        Ok((best, &self.pools[query_id][best]))
    }

    /// Group-baselined REINFORCE step for one query.
    ///
    /// With `A_k = reward_k - mean(reward)`, every rollout adds
    /// `lr · A_k · (onehot(c_k) - p) / temperature` to the logits, where `p`
    /// is the distribution before the update.
    pub fn update(&mut self, query_id: &str, rollouts: &[Rollout<S>]) -> Result<()> {
        if rollouts.is_empty() {
            return Err(Error::NoRollouts);
        }
        if let Some(r) = rollouts.iter().find(|r| r.query_id != query_id) {
            return Err(Error::QueryMismatch {
                expected: query_id.to_string(),
                got: r.query_id.clone(),
            });
        }
        let (lr, temp) = (self.learning_rate, self.temperature);
        let logits = self
            .logits
            .get_mut(query_id)
            .ok_or_else(|| Error::UnknownQuery(query_id.to_string()))?;
        if let Some(r) = rollouts.iter().find(|r| r.candidate_index >= logits.len()) {
            return Err(Error::InvalidQuery {
                query_id: query_id.to_string(),
                reason: format!("candidate index {} out of range", r.candidate_index),
            });
        }
        let rewards: Vec<(usize, S)> = rollouts
            .iter()
            .map(|r| (r.candidate_index, r.reward))
            .collect();
        apply_gradient(logits, &rewards, lr, temp);
        Ok(())
    }
}

fn apply_gradient<S: Real>(logits: &mut [S], rollouts: &[(usize, S)], lr: S, temperature: S) {
    // Constant rewards carry no signal; skip before rounding in the mean
    // can leave a residual advantage.
    if rollouts.iter().all(|r| r.1 == rollouts[0].1) {
        return;
    }
    let k = S::from_usize(rollouts.len());
    let mean = rollouts.iter().fold(S::zero(), |a, r| a + r.1) / k;
    let probs = softmax(logits, temperature);
    let mut grad = vec![S::zero(); logits.len()];
    for &(chosen, reward) in rollouts {
        let adv = reward - mean;
        if adv == S::zero() {
            continue;
        }
        for (j, g) in grad.iter_mut().enumerate() {
            let indicator = if j == chosen { S::one() } else { S::zero() };
            *g = *g + adv * (indicator - probs[j]);
        }
    }
    for (l, g) in logits.iter_mut().zip(grad) {
        *l = *l + lr * g / temperature;
    }
}

/// Functional form of [`PolicyState::update`].
pub fn reinforce_update<S: Real>(
    policy: &PolicyState<S>,
    query_id: &str,
    rollouts: &[Rollout<S>],
) -> Result<PolicyState<S>> {
    let mut next = policy.clone();
    next.update(query_id, rollouts)?;
    Ok(next)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainRecord {
    pub stage: Stage,
    pub iteration: usize,
    pub mean_reward: f64,
    pub mean_selected_m: f64,
    pub retained_query_count: usize,
    /// Mean size of the winning subset (stage I only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mean_best_subset_m: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainLog {
    pub records: Vec<TrainRecord>,
}

impl TrainLog {
    pub fn write_jsonl(&self, path: &Path) -> Result<()> {
        crate::corpus::write_jsonl(path, &self.records)
    }

    pub fn read_jsonl(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let records = text
            .lines()
            .filter(|l| !l.trim().is_empty())
            .map(|l| {
                serde_json::from_str(l).map_err(|e| Error::CorruptArtifact {
                    path: path.to_path_buf(),
                    reason: e.to_string(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { records })
    }

    /// Mean of `mean_selected_m` over records `range` of this log.
    pub fn mean_selected_m(&self, range: std::ops::Range<usize>) -> f64 {
        let slice = &self.records[range];
        slice.iter().map(|r| r.mean_selected_m).sum::<f64>() / slice.len() as f64
    }
}

/// Everything a stage needs besides the policy and its queries.
pub struct TrainEnv<'a, S, R: ?Sized> {
    pub retriever: &'a R,
    pub fusion: Fusion,
    pub reward: RewardConfig<S>,
    /// Rollouts per query per iteration.
    pub rollouts: usize,
    /// Spread per-query work over the rayon pool. Results are identical
    /// either way.
    pub parallel: bool,
}

/// Reward of every candidate in a query's pool under one stage, plus the
/// winning-subset size for stage I.
#[derive(Debug, Clone, PartialEq)]
pub struct RewardTable<S> {
    pub rewards: Vec<S>,
    pub best_subset_m: Vec<Option<usize>>,
}

pub fn reward_table<S, R>(
    stage: Stage,
    pool: &[SubQuerySet],
    gold_ids: &BTreeSet<String>,
    env: &TrainEnv<'_, S, R>,
) -> Result<RewardTable<S>>
where
    S: Real,
    R: Retriever<S> + ?Sized,
{
    let mut rewards = Vec::with_capacity(pool.len());
    let mut best_subset_m = Vec::with_capacity(pool.len());
    for cand in pool {
        if !format_gate(&cand.render(), env.reward.m_max) {
            rewards.push(env.reward.delta);
            best_subset_m.push(None);
            continue;
        }
        match stage {
            Stage::Explore => {
                let out = stage1_reward(cand, env.retriever, env.fusion, gold_ids, &env.reward)?;
                rewards.push(out.reward);
                best_subset_m.push(Some(out.best_subset.len()));
            }
            Stage::Converge => {
                rewards.push(stage2_reward(
                    cand,
                    env.retriever,
                    env.fusion,
                    gold_ids,
                    &env.reward,
                )?);
                best_subset_m.push(None);
            }
        }
    }
    Ok(RewardTable {
        rewards,
        best_subset_m,
    })
}

struct QueryStep {
    reward_sum: f64,
    m_sum: usize,
    best_m_sum: usize,
    best_m_count: usize,
}

/// Trains `policy` on `queries` for `epochs` iterations. One iteration gives
/// every query `env.rollouts` rollouts and one update.
pub fn run_stage<S, R>(
    stage: Stage,
    queries: &[&QueryInstance],
    policy: PolicyState<S>,
    env: &TrainEnv<'_, S, R>,
    epochs: usize,
) -> Result<(PolicyState<S>, TrainLog)>
where
    S: Real,
    R: Retriever<S> + ?Sized,
{
    if stage == Stage::Converge && queries.is_empty() {
        return Err(Error::EmptyCurriculum);
    }
    if env.rollouts == 0 {
        return Err(Error::config("policy.rollouts", "must be at least 1"));
    }
    env.reward.validate()?;
    let mut policy = policy;
    let mut log = TrainLog::default();
    if epochs == 0 {
        return Ok((policy, log));
    }

    let tables: Vec<RewardTable<S>> = {
        let build = |q: &&QueryInstance| -> Result<RewardTable<S>> {
            reward_table(stage, policy.pool(&q.id)?, &q.gold_ids, env)
        };
        if env.parallel {
            queries.par_iter().map(build).collect::<Result<_>>()?
        } else {
            queries.iter().map(build).collect::<Result<_>>()?
        }
    };

    let wanted: BTreeMap<&str, usize> = queries
        .iter()
        .enumerate()
        .map(|(i, q)| (q.id.as_str(), i))
        .collect();
    let (temperature, lr, seed) = (policy.temperature, policy.learning_rate, policy.seed);
    let pools = &policy.pools;
    let mut slots: Vec<(usize, &str, &mut Vec<S>)> = policy
        .logits
        .iter_mut()
        .filter_map(|(id, l)| wanted.get(id.as_str()).map(|&i| (i, id.as_str(), l)))
        .collect();
    slots.sort_by_key(|s| s.0);

    for iteration in 0..epochs {
        let step = |(i, id, logits): &mut (usize, &str, &mut Vec<S>)| -> QueryStep {
            let table = &tables[*i];
            let pool = &pools[*id];
            let mut rng = rollout_rng(seed, RngPurpose::Train(stage), iteration, id);
            let probs = softmax(logits, temperature);
            let mut rollouts = Vec::with_capacity(env.rollouts);
            let mut out = QueryStep {
                reward_sum: 0.0,
                m_sum: 0,
                best_m_sum: 0,
                best_m_count: 0,
            };
            for _ in 0..env.rollouts {
                let u = S::from_f64(rng.random::<f64>());
                let mut acc = S::zero();
                let mut c = probs.len() - 1;
                for (j, &p) in probs.iter().enumerate() {
                    acc = acc + p;
                    if u < acc {
                        c = j;
                        break;
                    }
                }
                let reward = table.rewards[c];
                out.reward_sum += reward.to_f64();
                out.m_sum += pool[c].len();
                if let Some(m) = table.best_subset_m[c] {
                    out.best_m_sum += m;
                    out.best_m_count += 1;
                }
                rollouts.push((c, reward));
            }
            apply_gradient(logits, &rollouts, lr, temperature);
            out
        };
        let steps: Vec<QueryStep> = if env.parallel {
            slots.par_iter_mut().map(step).collect()
        } else {
            slots.iter_mut().map(step).collect()
        };
        let n = (queries.len() * env.rollouts) as f64;
        let best_count: usize = steps.iter().map(|s| s.best_m_count).sum();
        log.records.push(TrainRecord {
            stage,
            iteration,
            mean_reward: steps.iter().map(|s| s.reward_sum).sum::<f64>() / n,
            mean_selected_m: steps.iter().map(|s| s.m_sum).sum::<usize>() as f64 / n,
            retained_query_count: queries.len(),
            mean_best_subset_m: (stage == Stage::Explore && best_count > 0).then(|| {
                steps.iter().map(|s| s.best_m_sum).sum::<usize>() as f64 / best_count as f64
            }),
        });
    }
    drop(slots);
    Ok((policy, log))
}

//! Phase runner behind the command-line interface.
//!
//! Every phase reads its inputs from, and writes its own artifacts to, the
//! run's output directory:
//!
//! | phase        | writes                                                      |
//! |--------------|-------------------------------------------------------------|
//! | `index`      | `index.json`, `validation.json`                             |
//! | `stage1`     | `policy_stage1.json`, `trainlog_stage1.jsonl`               |
//! | `curriculum` | `complexity.jsonl`, `curriculum.jsonl`, `curriculum_summary.json` |
//! | `stage2`     | `policy_stage2.json`, `trainlog_stage2.jsonl`               |
//! | `eval`       | `eval_<label>.json`, `eval_<label>.txt`                     |
//!
//! Each invocation also writes the effective configuration to
//! `config.effective.toml`.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{de::DeserializeOwned, Deserialize, Serialize};

use crate::config::{RetrieverKind, RunConfig};
use crate::corpus::{
    load_corpus, load_queries, validate_dataset, Corpus, QueryInstance, SubQuerySet,
};
use crate::curriculum::{build_curriculum, complexity_score, ComplexityRecord, Curriculum};
use crate::error::{Error, Result};
use crate::metrics::{evaluate, format_table, EvalResult};
use crate::policy::{reward_table, run_stage, PolicyState, TrainEnv, TrainLog};
use crate::retrieval::{
    build_dense_index, build_sparse_index, load_embeddings, DenseIndex, RankedList, Retriever,
    SparseIndex,
};
use crate::reward::Stage;

pub const CONFIG_FILE: &str = "config.effective.toml";
pub const INDEX_FILE: &str = "index.json";
pub const VALIDATION_FILE: &str = "validation.json";
pub const POLICY_STAGE1: &str = "policy_stage1.json";
pub const POLICY_STAGE2: &str = "policy_stage2.json";
pub const TRAINLOG_STAGE1: &str = "trainlog_stage1.jsonl";
pub const TRAINLOG_STAGE2: &str = "trainlog_stage2.jsonl";
pub const COMPLEXITY_FILE: &str = "complexity.jsonl";
pub const CURRICULUM_FILE: &str = "curriculum.jsonl";
pub const CURRICULUM_SUMMARY: &str = "curriculum_summary.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Phase {
    Index,
    Stage1,
    Curriculum,
    Stage2,
    Eval,
}

/// Which rewrite each query uses at evaluation time.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvalPolicy {
    /// The raw query text as the only sub-query.
    Raw,
    Stage1,
    Stage2,
    /// Stage II checkpoint when present, else stage I.
    Latest,
}

impl std::str::FromStr for EvalPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "raw" => Ok(Self::Raw),
            "stage1" => Ok(Self::Stage1),
            "stage2" => Ok(Self::Stage2),
            "latest" => Ok(Self::Latest),
            other => Err(Error::config(
                "policy",
                format!("expected raw, stage1, stage2 or latest, got {other:?}"),
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum StoredIndex {
    Sparse(SparseIndex<f64>),
    Dense(DenseIndex<f64>),
}

impl StoredIndex {
    pub fn kind(&self) -> RetrieverKind {
        match self {
            StoredIndex::Sparse(_) => RetrieverKind::Sparse,
            StoredIndex::Dense(_) => RetrieverKind::Dense,
        }
    }
}

impl Retriever<f64> for StoredIndex {
    fn search(&self, query: &str, top_k: usize) -> Result<RankedList<f64>> {
        match self {
            StoredIndex::Sparse(i) => Ok(i.search(query, top_k)),
            StoredIndex::Dense(i) => i.search(query, top_k),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct CurriculumLine {
    query_id: String,
    tau: f64,
}

/// Loaded inputs plus the effective configuration of one run.
pub struct Pipeline {
    pub config: RunConfig,
    pub corpus: Corpus,
    pub queries: Vec<QueryInstance>,
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).expect("artifact serializes");
    fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
}

fn read_artifact<T: DeserializeOwned>(path: &Path, phase: &'static str) -> Result<T> {
    if !path.exists() {
        return Err(Error::MissingArtifact {
            path: path.to_path_buf(),
            phase,
        });
    }
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::CorruptArtifact {
        path: path.to_path_buf(),
        reason: e.to_string(),
    })
}

impl Pipeline {
    /// Validates `config`, loads the corpus and queries, and records the
    /// effective configuration in the output directory.
    pub fn open(config: RunConfig) -> Result<Self> {
        config.validate()?;
        let corpus = load_corpus(&config.paths.corpus)?;
        let queries = load_queries(&config.paths.queries, &corpus)?;
        let out = &config.paths.output_dir;
        fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
        let cfg_path = out.join(CONFIG_FILE);
        fs::write(&cfg_path, config.to_toml()).map_err(|e| Error::io(&cfg_path, e))?;
        Ok(Self {
            config,
            corpus,
            queries,
        })
    }

    fn out(&self, name: &str) -> PathBuf {
        self.config.paths.output_dir.join(name)
    }

    /// Builds the configured index and writes the dataset validation report.
    pub fn index(&self) -> Result<Vec<String>> {
        let index = match self.config.retriever {
            RetrieverKind::Sparse => {
                StoredIndex::Sparse(build_sparse_index(&self.corpus, self.config.sparse)?)
            }
            RetrieverKind::Dense => {
                let store = match &self.config.paths.embeddings {
                    Some(p) => Some(load_embeddings(p)?),
                    None => None,
                };
                StoredIndex::Dense(build_dense_index(&self.corpus, self.config.dense, store)?)
            }
        };
        write_json(&self.out(INDEX_FILE), &index)?;
        let report = validate_dataset(&self.corpus, &self.queries);
        write_json(&self.out(VALIDATION_FILE), &report)?;
        let mut notes = vec![format!(
            "indexed {} documents ({:?}); {} queries",
            self.corpus.len(),
            self.config.retriever,
            self.queries.len()
        )];
        notes.extend(report.warnings);
        Ok(notes)
    }

    pub fn load_index(&self) -> Result<StoredIndex> {
        let index: StoredIndex = read_artifact(&self.out(INDEX_FILE), "index")?;
        if index.kind() != self.config.retriever {
            return Err(Error::config(
                "retriever",
                format!(
                    "index was built for {:?}; rerun `index` with this retriever",
                    index.kind()
                ),
            ));
        }
        Ok(index)
    }

    fn env<'a>(&self, index: &'a StoredIndex) -> TrainEnv<'a, f64, StoredIndex> {
        TrainEnv {
            retriever: index,
            fusion: self.config.fusion,
            reward: self.config.reward,
            rollouts: self.config.policy.rollouts,
            parallel: self.config.policy.parallel,
        }
    }

    pub fn initial_policy(&self) -> Result<PolicyState<f64>> {
        let p = &self.config.policy;
        PolicyState::for_queries(
            &self.queries,
            self.config.reward.m_max,
            p.learning_rate,
            p.temperature,
            p.seed,
        )
    }

    /// Stage I on the full training set.
    pub fn stage1(&self) -> Result<TrainLog> {
        let index = self.load_index()?;
        let queries: Vec<&QueryInstance> = self.queries.iter().collect();
        let (policy, log) = run_stage(
            Stage::Explore,
            &queries,
            self.initial_policy()?,
            &self.env(&index),
            self.config.policy.stage1_epochs,
        )?;
        write_json(&self.out(POLICY_STAGE1), &policy)?;
        log.write_jsonl(&self.out(TRAINLOG_STAGE1))?;
        Ok(log)
    }

    /// Scores every query with the frozen stage I policy and filters the
    /// stage II curriculum.
    pub fn curriculum(&self) -> Result<Curriculum> {
        let index = self.load_index()?;
        let policy: PolicyState<f64> = read_artifact(&self.out(POLICY_STAGE1), "stage1")?;
        let env = self.env(&index);
        let k = self.config.curriculum.k;
        let score = |q: &QueryInstance| -> Result<ComplexityRecord<f64>> {
            let table = reward_table(Stage::Explore, policy.pool(&q.id)?, &q.gold_ids, &env)?;
            complexity_score(&q.id, &policy, |i, _| Ok(table.rewards[i]), k, policy.seed)
        };
        let records: Vec<ComplexityRecord<f64>> = if self.config.policy.parallel {
            self.queries.par_iter().map(score).collect::<Result<_>>()?
        } else {
            self.queries.iter().map(score).collect::<Result<_>>()?
        };
        let cur = build_curriculum(&records, &self.config.curriculum);
        crate::corpus::write_jsonl(&self.out(COMPLEXITY_FILE), &records)?;
        let lines: Vec<CurriculumLine> = records
            .iter()
            .filter(|r| cur.query_ids.contains(&r.query_id))
            .map(|r| CurriculumLine {
                query_id: r.query_id.clone(),
                tau: r.tau,
            })
            .collect();
        crate::corpus::write_jsonl(&self.out(CURRICULUM_FILE), &lines)?;
        write_json(&self.out(CURRICULUM_SUMMARY), &cur.summary)?;
        Ok(cur)
    }

    pub fn load_curriculum(&self) -> Result<BTreeSet<String>> {
        let path = self.out(CURRICULUM_FILE);
        if !path.exists() {
            return Err(Error::MissingArtifact {
                path,
                phase: "curriculum",
            });
        }
        let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        text.lines()
            .filter(|l| !l.trim().is_empty())
            .map(|l| {
                serde_json::from_str::<CurriculumLine>(l)
                    .map(|c| c.query_id)
                    .map_err(|e| Error::CorruptArtifact {
                        path: path.clone(),
                        reason: e.to_string(),
                    })
            })
            .collect()
    }

    /// Stage II on the curriculum, starting from the stage I checkpoint.
    pub fn stage2(&self) -> Result<TrainLog> {
        let index = self.load_index()?;
        let policy: PolicyState<f64> = read_artifact(&self.out(POLICY_STAGE1), "stage1")?;
        let keep = self.load_curriculum()?;
        let queries: Vec<&QueryInstance> = self
            .queries
            .iter()
            .filter(|q| keep.contains(&q.id))
            .collect();
        let (policy, log) = run_stage(
            Stage::Converge,
            &queries,
            policy,
            &self.env(&index),
            self.config.policy.stage2_epochs,
        )?;
        write_json(&self.out(POLICY_STAGE2), &policy)?;
        log.write_jsonl(&self.out(TRAINLOG_STAGE2))?;
        Ok(log)
    }

    fn choose(&self, which: EvalPolicy) -> Result<(String, Option<PolicyState<f64>>)> {
        let stage2 = self.out(POLICY_STAGE2);
        match which {
            EvalPolicy::Raw => Ok(("raw".into(), None)),
            EvalPolicy::Stage1 => Ok((
                "stage1".into(),
                Some(read_artifact(&self.out(POLICY_STAGE1), "stage1")?),
            )),
            EvalPolicy::Stage2 => Ok(("stage2".into(), Some(read_artifact(&stage2, "stage2")?))),
            EvalPolicy::Latest if stage2.exists() => self.choose(EvalPolicy::Stage2),
            EvalPolicy::Latest => self.choose(EvalPolicy::Stage1),
        }
    }

    /// Greedy rewrite per query, retrieval, fusion and metrics.
    pub fn eval(&self, which: EvalPolicy) -> Result<EvalResult> {
        let index = self.load_index()?;
        let (label, policy) = self.choose(which)?;
        let depth = self
            .config
            .metrics
            .iter()
            .map(|m| m.k)
            .chain([self.config.reward.top_k])
            .max()
            .unwrap_or(self.config.reward.top_k);
        let mut rankings = Vec::with_capacity(self.queries.len());
        for q in &self.queries {
            let subs = match &policy {
                None => SubQuerySet::single(q.text.trim())?,
                Some(p) => p.greedy(&q.id)?.1.clone(),
            };
            let lists = subs
                .iter()
                .map(|s| index.search(s, depth))
                .collect::<Result<Vec<_>>>()?;
            let fused = self.config.fusion.fuse(&lists, depth)?;
            let ids: Vec<String> = fused.entries.into_iter().map(|e| e.doc_id).collect();
            rankings.push((q.id.as_str(), &q.gold_ids, ids));
        }
        let result = evaluate(&label, &self.config.metrics, rankings);
        write_json(&self.out(&format!("eval_{label}.json")), &result)?;
        let table_path = self.out(&format!("eval_{label}.txt"));
        fs::write(&table_path, format_table(std::slice::from_ref(&result)))
            .map_err(|e| Error::io(&table_path, e))?;
        Ok(result)
    }
}

/// Comparison table over every `eval_*.json` in `run_dir`, rows in file
/// name order.
pub fn report(run_dir: &Path) -> Result<String> {
    let entries = fs::read_dir(run_dir).map_err(|e| Error::io(run_dir, e))?;
    let mut files: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.file_name()
                .and_then(|n| n.to_str())
                .is_some_and(|n| n.starts_with("eval_") && n.ends_with(".json"))
        })
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(Error::NoEvalArtifacts(run_dir.to_path_buf()));
    }
    let results = files
        .iter()
        .map(|p| read_artifact::<EvalResult>(p, "eval"))
        .collect::<Result<Vec<_>>>()?;
    Ok(format_table(&results))
}

/// Runs `phases` in pipeline order.
pub fn run_pipeline(config: RunConfig, phases: &[Phase], eval: EvalPolicy) -> Result<Vec<String>> {
    let pipeline = Pipeline::open(config)?;
    let mut phases = phases.to_vec();
    phases.sort();
    phases.dedup();
    let mut notes = Vec::new();
    for phase in phases {
        match phase {
            Phase::Index => notes.extend(pipeline.index()?),
            Phase::Stage1 => {
                let log = pipeline.stage1()?;
                notes.push(summarize("stage I", &log));
            }
            Phase::Curriculum => {
                let cur = pipeline.curriculum()?;
                notes.push(format!(
                    "curriculum: retained {}/{} queries (tau_thres {:.4}, K {})",
                    cur.summary.retained, cur.summary.total, cur.summary.tau_thres, cur.summary.k
                ));
                notes.extend(cur.warnings);
            }
            Phase::Stage2 => {
                let log = pipeline.stage2()?;
                notes.push(summarize("stage II", &log));
            }
            Phase::Eval => {
                let result = pipeline.eval(eval)?;
                notes.push(format_table(&[result]));
            }
        }
    }
    Ok(notes)
}

fn summarize(stage: &str, log: &TrainLog) -> String {
    match (log.records.first(), log.records.last()) {
        (Some(a), Some(b)) => format!(
            "{stage}: {} iterations, mean reward {:.4} -> {:.4}, mean M {:.3} -> {:.3}",
            log.records.len(),
            a.mean_reward,
            b.mean_reward,
            a.mean_selected_m,
            b.mean_selected_m
        ),
        _ => format!("{stage}: no iterations"),
    }
}

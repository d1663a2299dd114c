//! Run configuration.
//!
//! One TOML file holds every knob; omitted fields take the defaults below.
//! Symbol mapping:
//!
//! | field                       | symbol  | default |
//! |-----------------------------|---------|---------|
//! | `sparse.k1`, `sparse.b`     | k₁, b   | 1.2, 0.75 |
//! | `reward.eta`                | η       | 1.0     |
//! | `reward.delta`              | δ       | -1.0    |
//! | `reward.lambda`             | λ       | 1.0     |
//! | `reward.k_star`             | k*      | 3       |
//! | `reward.rank_cutoff`        | Φ support | 100   |
//! | `reward.top_k`              | k       | 100     |
//! | `reward.m_max`              | M cap   | 6       |
//! | `curriculum.tau_thres`      | τ_thres | 5/3     |
//! | `curriculum.k`              | K (τ rollouts) | 8 |
//! | `policy.rollouts`           | K (training rollouts) | 8 |

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::curriculum::CurriculumConfig;
use crate::error::{Error, Result};
use crate::fusion::Fusion;
use crate::metrics::{default_metric_specs, MetricSpec};
use crate::retrieval::{DenseIndexConfig, EmbeddingSource, SparseIndexConfig};
use crate::reward::RewardConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RetrieverKind {
    Sparse,
    Dense,
}

impl std::str::FromStr for RetrieverKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sparse" => Ok(Self::Sparse),
            "dense" => Ok(Self::Dense),
            other => Err(Error::config(
                "retriever",
                format!("expected `sparse` or `dense`, got {other:?}"),
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Paths {
    pub corpus: PathBuf,
    pub queries: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub embeddings: Option<PathBuf>,
    pub output_dir: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PolicyConfig {
    pub seed: u64,
    pub learning_rate: f64,
    pub temperature: f64,
    /// Rollouts per query per training iteration.
    pub rollouts: usize,
    pub stage1_epochs: usize,
    pub stage2_epochs: usize,
    pub parallel: bool,
}

impl Default for PolicyConfig {
    fn default() -> Self {
        Self {
            seed: 42,
            learning_rate: 0.5,
            temperature: 1.0,
            rollouts: 8,
            stage1_epochs: 30,
            stage2_epochs: 30,
            parallel: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub paths: Paths,
    #[serde(default = "default_retriever")]
    pub retriever: RetrieverKind,
    #[serde(default)]
    pub fusion: Fusion,
    #[serde(default)]
    pub sparse: SparseIndexConfig,
    #[serde(default)]
    pub dense: DenseIndexConfig,
    #[serde(default)]
    pub reward: RewardConfig<f64>,
    #[serde(default)]
    pub curriculum: CurriculumConfig<f64>,
    #[serde(default)]
    pub policy: PolicyConfig,
    #[serde(default = "default_metric_specs")]
    pub metrics: Vec<MetricSpec>,
}

fn default_retriever() -> RetrieverKind {
    RetrieverKind::Sparse
}

impl RunConfig {
    pub fn new(corpus: PathBuf, queries: PathBuf, output_dir: PathBuf) -> Self {
        Self {
            paths: Paths {
                corpus,
                queries,
                embeddings: None,
                output_dir,
            },
            retriever: default_retriever(),
            fusion: Fusion::default(),
            sparse: SparseIndexConfig::default(),
            dense: DenseIndexConfig::default(),
            reward: RewardConfig::default(),
            curriculum: CurriculumConfig::default(),
            policy: PolicyConfig::default(),
            metrics: default_metric_specs(),
        }
    }

    /// Parses a TOML file. Relative paths inside it resolve against the
    /// file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg: RunConfig = toml::from_str(&text).map_err(|e| {
            let line = e
                .span()
                .map(|s| text[..s.start].matches('\n').count() + 1)
                .unwrap_or(0);
            Error::config(
                format!("{}:{line}", path.display()),
                e.message().replace('\n', " "),
            )
        })?;
        if let Some(base) = path.parent() {
            cfg.paths.corpus = rebase(base, &cfg.paths.corpus);
            cfg.paths.queries = rebase(base, &cfg.paths.queries);
            cfg.paths.output_dir = rebase(base, &cfg.paths.output_dir);
            cfg.paths.embeddings = cfg.paths.embeddings.as_deref().map(|p| rebase(base, p));
        }
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    /// Checks every numeric field and that input paths exist.
    pub fn validate(&self) -> Result<()> {
        self.sparse.validate()?;
        self.dense.validate()?;
        self.reward.validate()?;
        self.curriculum.validate()?;
        let p = &self.policy;
        if !(p.learning_rate.is_finite() && p.learning_rate > 0.0) {
            return Err(Error::config("policy.learning_rate", "must be positive"));
        }
        if !(p.temperature.is_finite() && p.temperature > 0.0) {
            return Err(Error::config("policy.temperature", "must be positive"));
        }
        if p.rollouts == 0 {
            return Err(Error::config("policy.rollouts", "must be at least 1"));
        }
        if let Fusion::Rrf { smoothing } = self.fusion {
            if !(smoothing > 0.0) {
                return Err(Error::config("fusion.smoothing", "must be positive"));
            }
        }
        if let Some(m) = self.metrics.iter().find(|m| m.k == 0) {
            return Err(Error::config(
                "metrics",
                format!("{:?} has k = 0", m.metric),
            ));
        }
        for (field, path) in [
            ("paths.corpus", Some(&self.paths.corpus)),
            ("paths.queries", Some(&self.paths.queries)),
            ("paths.embeddings", self.paths.embeddings.as_ref()),
        ] {
            if let Some(path) = path {
                if !path.exists() {
                    return Err(Error::config(
                        field,
                        format!("{} does not exist", path.display()),
                    ));
                }
            }
        }
        if self.retriever == RetrieverKind::Dense
            && self.dense.embedding_source == EmbeddingSource::FileProvided
            && self.paths.embeddings.is_none()
        {
            return Err(Error::config(
                "paths.embeddings",
                "required for file-provided dense embeddings",
            ));
        }
        Ok(())
    }
}

fn rebase(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_file_takes_defaults() {
        let cfg: RunConfig = toml::from_str(
            r#"
            [paths]
            corpus = "c.jsonl"
            queries = "q.jsonl"
            output_dir = "out"
            "#,
        )
        .unwrap();
        assert_eq!(cfg.reward, RewardConfig::default());
        assert_eq!(cfg.curriculum.tau_thres, 5.0 / 3.0);
        assert_eq!(cfg.curriculum.k, 8);
        assert_eq!(cfg.retriever, RetrieverKind::Sparse);
        assert_eq!(cfg.fusion, Fusion::Rsf);
    }

    #[test]
    fn round_trips_through_toml() {
        let mut cfg = RunConfig::new("c".into(), "q".into(), "o".into());
        cfg.fusion = Fusion::rrf();
        cfg.reward = RewardConfig::multi_hop();
        let back: RunConfig = toml::from_str(&cfg.to_toml()).unwrap();
        assert_eq!(cfg, back);
    }

    #[test]
    fn unknown_field_rejected() {
        let err = toml::from_str::<RunConfig>(
            r#"
            [paths]
            corpus = "c"
            queries = "q"
            output_dir = "o"
            [reward]
            etaa = 0.5
            "#,
        );
        assert!(err.is_err());
    }

    #[test]
    fn validation_names_field() {
        let mut cfg = RunConfig::new("/nonexistent/c".into(), "q".into(), "o".into());
        match cfg.validate().unwrap_err() {
            Error::Config { field, .. } => assert_eq!(field, "paths.corpus"),
            other => panic!("unexpected {other}"),
        }
        cfg.reward.eta = 0.0;
        match cfg.validate().unwrap_err() {
            Error::Config { field, .. } => assert_eq!(field, "reward.eta"),
            other => panic!("unexpected {other}"),
        }
    }
}

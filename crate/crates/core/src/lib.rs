//! Adaptive complex-query retrieval.
//!
//! A query is rewritten into one or more sub-queries, each sub-query
//! retrieves independently (BM25 or exact inner-product search), and the
//! resulting lists are merged by Rank-Score Fusion. The reward stack turns
//! fused gold ranks into a dense training signal, and a two-stage
//! curriculum (explore over sub-query subsets, then converge on the full
//! ensemble) drives a per-query categorical policy over candidate rewrites.
//!
//! The numeric core is generic over [`Scalar`]/[`Real`]; the aliases below
//! fix it to `f64` for everyday use, and [`Rational`] gives exact rank
//! arithmetic where no logarithms are involved.

// `!(x > 0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod candidates;
pub mod config;
pub mod corpus;
pub mod curriculum;
pub mod error;
pub mod fusion;
pub mod metrics;
pub mod pipeline;
pub mod policy;
pub mod retrieval;
pub mod reward;
pub mod scalar;
pub mod text;

pub use error::{Error, Result};
pub use scalar::{Real, Scalar};

/// Exact rational scalar.
pub type Rational = num_rational::Ratio<i64>;

pub type RankedList = retrieval::RankedList<f64>;
pub type SparseIndex = retrieval::SparseIndex<f64>;
pub type DenseIndex = retrieval::DenseIndex<f64>;
pub type FusionStats = fusion::FusionStats<f64>;
pub type FusedRanking = fusion::FusedRanking<f64>;
pub type RewardConfig = reward::RewardConfig<f64>;
pub type CurriculumConfig = curriculum::CurriculumConfig<f64>;
pub type ComplexityRecord = curriculum::ComplexityRecord<f64>;
pub type PolicyState = policy::PolicyState<f64>;

pub type ExactFusionStats = fusion::FusionStats<Rational>;
pub type ExactRewardConfig = reward::RewardConfig<Rational>;
pub type ExactComplexityRecord = curriculum::ComplexityRecord<Rational>;

//! Knowledge-graph completion that scores a fact by combining a translation
//! embedding (TransE or TransH) with best-first search over Horn rules.
//!
//! The pipeline: load a [`KnowledgeGraph`], train an [`EmbeddingModel`],
//! mine or import [`Rule`]s, measure them into a [`RuleIndex`], then score
//! facts with [`phi`] and rank them with [`evaluate`].

pub mod embedding;
pub mod error;
pub mod eval;
pub mod graph;
pub mod oracle;
pub mod reasoner;
pub mod rules;

pub use embedding::{
    open_triplet_score, train, triplet_score, EmbeddingModel, ModelKind, NegativeSampling,
    NormOrder, TrainConfig, TranslationModel,
};
pub use error::{Error, Result};
pub use eval::{evaluate, EvalConfig, EvalReport, Metrics, RankRecord, Side};
pub use graph::{ColumnOrder, EntityId, KnowledgeGraph, RawTriple, RelationId, Triplet};
pub use reasoner::{phi, phi_observed, PhiResult, SearchConfig, SearchState};
pub use rules::{mine_rules, MinerConfig, Rule, RuleIndex};

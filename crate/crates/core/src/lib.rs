//! Entity attribute ranking over knowledge bases.
//!
//! Given an entity-bearing query (e.g. "the wife of Lincoln" linked to
//! `Abraham_Lincoln`), this crate ranks the attributes of the linked
//! entities by how likely their values answer the query. It provides:
//!
//! - [`mrf`]: a Markov-Random-Field ranker combining query/attribute
//!   embedding similarity, attribute/entity statistics, and query/entity
//!   term overlap;
//! - [`ltr`]: a seven-feature linear model trained with Coordinate Ascent,
//!   with grouped cross-validation and feature ablation;
//! - [`baselines`]: BM25, Dirichlet language model, and a two-field
//!   mixture of language models over (entity, attribute) documents;
//! - [`eval`]: graded-relevance metrics (NDCG/P/MRR/MAP), paired t-test,
//!   Fleiss' kappa, and candidate-pool construction;
//! - [`kb`], [`embedding`], [`lexsim`], [`linker`]: the data layers
//!   (attribute-value store, word vectors, taxonomy similarity, query
//!   annotations).

pub mod baselines;
pub mod embedding;
pub mod error;
pub mod eval;
pub mod kb;
pub mod lexsim;
pub mod linker;
pub mod ltr;
pub mod mrf;
pub mod text;

pub use error::{Error, Result};

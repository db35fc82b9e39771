//! MRF-based attribute ranking.
//!
//! An attribute `a` is scored against a query by summing, over the linked
//! entities `e`, three families of 2-clique feature functions:
//!
//! - query term / attribute: embedding closeness of the term to the
//!   attribute-name tokens ([`f1_term_attr`]);
//! - attribute / entity: how common the attribute is in the entity,
//!   smoothed by its frequency in the global pair pool ([`f2_attr_entity`]);
//! - query term / entity: how many of the entity's pairs mention the term,
//!   smoothed globally ([`f3_term_entity`]).
//!
//! All feature functions are log-domain; every log argument is clamped
//! below by `epsilon`, which keeps scores finite without reordering
//! candidates whose arguments are positive. The normalization constant of
//! the underlying graphical model is dropped (rank-equivalent), as are
//! 3-cliques.

use std::collections::BTreeSet;

use crate::embedding::WordVectorStore;
use crate::error::{Error, Result};
use crate::kb::KnowledgeBase;
use crate::linker::QueryAnnotation;
use crate::text;

/// Clique weights and smoothing parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MrfParams {
    /// Weight of the query-term / attribute cliques.
    pub lambda1: f64,
    /// Weight of the attribute / entity clique.
    pub lambda2: f64,
    /// Weight of the query-term / entity cliques.
    pub lambda3: f64,
    /// Entity-vs-global smoothing of the attribute frequency feature.
    pub mu1: f64,
    /// Entity-vs-global smoothing of the term match feature.
    pub mu2: f64,
    /// Lower clamp for every log argument.
    pub epsilon: f64,
}

pub const DEFAULT_EPSILON: f64 = 1e-9;

impl Default for MrfParams {
    /// Sweep-selected defaults: lambda = (0.6, 0.2, 0.2), mu1 = mu2 = 0.5.
    fn default() -> Self {
        MrfParams {
            lambda1: 0.6,
            lambda2: 0.2,
            lambda3: 0.2,
            mu1: 0.5,
            mu2: 0.5,
            epsilon: DEFAULT_EPSILON,
        }
    }
}

impl MrfParams {
    pub fn new(lambda1: f64, lambda2: f64, lambda3: f64, mu1: f64, mu2: f64) -> Result<Self> {
        let params = MrfParams {
            lambda1,
            lambda2,
            lambda3,
            mu1,
            mu2,
            epsilon: DEFAULT_EPSILON,
        };
        params.validate()?;
        Ok(params)
    }

    /// Lambdas non-negative summing to 1 (within 1e-9), mus in [0, 1],
    /// epsilon positive.
    pub fn validate(&self) -> Result<()> {
        for (name, l) in [
            ("lambda1", self.lambda1),
            ("lambda2", self.lambda2),
            ("lambda3", self.lambda3),
        ] {
            if l.is_nan() || l < 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be >= 0, got {l}"
                )));
            }
        }
        let sum = self.lambda1 + self.lambda2 + self.lambda3;
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidParameter(format!(
                "lambda1 + lambda2 + lambda3 must be 1, got {sum}"
            )));
        }
        for (name, m) in [("mu1", self.mu1), ("mu2", self.mu2)] {
            if !(0.0..=1.0).contains(&m) {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be in [0, 1], got {m}"
                )));
            }
        }
        if self.epsilon.is_nan() || self.epsilon <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "epsilon must be positive, got {}",
                self.epsilon
            )));
        }
        Ok(())
    }
}

/// A candidate attribute: its name and the linked entities containing it.
#[derive(Debug, Clone)]
pub struct AttributeCandidate {
    pub attribute: String,
    pub supporting_entities: BTreeSet<String>,
    pub score: f64,
}

/// Query-term / attribute feature: log of the mean, over the attribute-name
/// tokens, of `1 - word_distance(q_i, w)`. Out-of-vocabulary pairs are
/// skipped; when every pair is out of vocabulary the mean argument is
/// `epsilon`.
pub fn f1_term_attr(store: &WordVectorStore, q_i: &str, attribute: &str, epsilon: f64) -> f64 {
    let mut sum = 0.0;
    let mut n = 0usize;
    for w in text::tokenize(attribute) {
        if let Some(dist) = store.word_distance(q_i, &w) {
            sum += 1.0 - dist;
            n += 1;
        }
    }
    let mean = if n == 0 { epsilon } else { sum / n as f64 };
    mean.max(epsilon).ln()
}

/// Attribute / entity feature: log of the smoothed attribute frequency,
/// `mu1 * (count in e / |e|) + (1 - mu1) * (count in pool / |pool|)`.
pub fn f2_attr_entity(
    kb: &KnowledgeBase,
    attribute: &str,
    entity: &str,
    mu1: f64,
    epsilon: f64,
) -> Result<f64> {
    let (with_attr, total) = kb.entity_counts(entity, attribute)?;
    let entity_fraction = with_attr as f64 / total as f64;
    let global_fraction = kb.global_attr_count(attribute) as f64 / kb.global_pair_count() as f64;
    let arg = mu1 * entity_fraction + (1.0 - mu1) * global_fraction;
    Ok(arg.max(epsilon).ln())
}

/// Query-term / entity feature: log of the smoothed fraction of pairs whose
/// attribute name or value contains the term.
pub fn f3_term_entity(
    kb: &KnowledgeBase,
    q_i: &str,
    entity: &str,
    mu2: f64,
    epsilon: f64,
) -> Result<f64> {
    let (matching, total) = kb.term_match_counts(entity, q_i)?;
    let entity_fraction = matching as f64 / total as f64;
    let global_fraction = kb.global_term_pair_count(q_i) as f64 / kb.global_pair_count() as f64;
    let arg = mu2 * entity_fraction + (1.0 - mu2) * global_fraction;
    Ok(arg.max(epsilon).ln())
}

/// Full ranking score of one attribute: sum over the linked entities of the
/// weighted clique features. The query-term/attribute sum does not depend on
/// the entity and is computed once, then weighted into every entity's term.
pub fn mrf_score(
    kb: &KnowledgeBase,
    store: &WordVectorStore,
    ann: &QueryAnnotation,
    attribute: &str,
    params: &MrfParams,
) -> Result<f64> {
    params.validate()?;
    let entities = ann.linked_entities();
    if entities.is_empty() {
        return Err(Error::NoLinkedEntities(ann.query_id.clone()));
    }
    let f1_sum: f64 = ann
        .terms
        .iter()
        .map(|q_i| f1_term_attr(store, q_i, attribute, params.epsilon))
        .sum();
    let mut score = 0.0;
    for entity in entities {
        let f2 = f2_attr_entity(kb, attribute, entity, params.mu1, params.epsilon)?;
        let mut f3_sum = 0.0;
        for q_i in &ann.terms {
            f3_sum += f3_term_entity(kb, q_i, entity, params.mu2, params.epsilon)?;
        }
        score += params.lambda1 * f1_sum + params.lambda2 * f2 + params.lambda3 * f3_sum;
    }
    Ok(score)
}

/// Candidate attributes of a query: the distinct attribute names over all
/// linked entities' pairs, each with its supporting entities.
pub fn candidate_attributes(
    kb: &KnowledgeBase,
    ann: &QueryAnnotation,
) -> Result<Vec<AttributeCandidate>> {
    let mut by_name: std::collections::BTreeMap<String, BTreeSet<String>> =
        std::collections::BTreeMap::new();
    for entity in ann.linked_entities() {
        let ent = kb
            .entity(entity)
            .ok_or_else(|| Error::UnknownEntity(entity.to_string()))?;
        for name in ent.attribute_names() {
            by_name
                .entry(name.to_string())
                .or_default()
                .insert(entity.to_string());
        }
    }
    Ok(by_name
        .into_iter()
        .map(|(attribute, supporting_entities)| AttributeCandidate {
            attribute,
            supporting_entities,
            score: 0.0,
        })
        .collect())
}

/// Rank all candidate attributes of a query. Scores descending, ties broken
/// by ascending attribute name, truncated at `cutoff`. A query without
/// linked entities yields an empty ranking (with a warning), since it has
/// no candidates.
pub fn rank_attributes_mrf(
    kb: &KnowledgeBase,
    store: &WordVectorStore,
    ann: &QueryAnnotation,
    params: &MrfParams,
    cutoff: usize,
) -> Result<Vec<(String, f64)>> {
    params.validate()?;
    if ann.linked_entities().is_empty() {
        log::warn!(
            "query `{}` has no linked entities; emitting empty ranking",
            ann.query_id
        );
        return Ok(Vec::new());
    }
    let mut ranked: Vec<(String, f64)> = Vec::new();
    for candidate in candidate_attributes(kb, ann)? {
        let score = mrf_score(kb, store, ann, &candidate.attribute, params)?;
        ranked.push((candidate.attribute, score));
    }
    sort_ranking(&mut ranked);
    ranked.truncate(cutoff);
    Ok(ranked)
}

/// Descending score, ties by ascending name.
pub fn sort_ranking(ranked: &mut [(String, f64)]) {
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
}

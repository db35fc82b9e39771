//! Learning-to-rank over seven features with Coordinate Ascent.
//!
//! Feature layout (one vector per (query, entity, attribute) instance):
//!
//! - `f1`: sum over query terms of the term/entity clique feature
//! - `f2`: the attribute/entity clique feature
//! - `f3`: sum over query terms of the term/attribute clique feature
//! - `f4`/`f5`: taxonomy / word-vector similarity of the *linked* query
//!   terms to the attribute-name + value text
//! - `f6`/`f7`: the same for the *not-linked* terms
//!
//! Similarity features are the mean, over the partition's terms, of each
//! term's best similarity to any token of the concatenated attribute-value
//! text; terms without any defined similarity are skipped, and a feature
//! with no contributing term is stored as 0 with its presence bit cleared.
//!
//! Training optimizes mean NDCG@5 by coordinate ascent on an L1-normalized
//! weight vector: random restarts, a +/- step ladder per coordinate scaled
//! by the current weight, accepting only strict improvements. At ranking
//! time an attribute's score is the max over its supporting entities.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::embedding::WordVectorStore;
use crate::error::{Error, Result};
use crate::eval;
use crate::kb::KnowledgeBase;
use crate::lexsim::Taxonomy;
use crate::linker::QueryAnnotation;
use crate::mrf::{self, MrfParams};
use crate::text;

pub const NUM_FEATURES: usize = 7;
pub const FEATURE_LABELS: [&str; NUM_FEATURES] = ["f1", "f2", "f3", "f4", "f5", "f6", "f7"];

const STEP_LADDER: [f64; 7] = [0.05, 0.1, 0.2, 0.5, 1.0, 2.0, 5.0];

/// The seven feature values plus a presence bitmask (bit i = feature i+1
/// had at least one contributing term; absent features are stored as 0).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeatureVector {
    pub values: [f64; NUM_FEATURES],
    pub present: u8,
}

impl FeatureVector {
    pub fn is_present(&self, feature: usize) -> bool {
        self.present & (1 << feature) != 0
    }

    pub fn score(&self, weights: &[f64; NUM_FEATURES]) -> f64 {
        self.values.iter().zip(weights).map(|(v, w)| v * w).sum()
    }
}

/// One graded (query, entity, attribute) training row.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingInstance {
    pub query_id: String,
    pub entity: String,
    pub attribute: String,
    pub features: FeatureVector,
    pub grade: u8,
}

/// A linear model with L1-normalized weights and its training record.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearModel {
    pub weights: [f64; NUM_FEATURES],
    pub training_ndcg: f64,
    pub restarts: usize,
    pub seed: u64,
    pub folds: Option<usize>,
    /// Per restart: the accepted training-metric values, starting with the
    /// random start's metric. Non-decreasing by construction.
    pub traces: Vec<Vec<f64>>,
}

/// Coordinate Ascent settings.
#[derive(Debug, Clone, Copy)]
pub struct CaOptions {
    pub restarts: usize,
    pub seed: u64,
    /// NDCG cutoff of the training metric.
    pub metric_k: usize,
    /// A coordinate move is kept only if it beats the current metric by
    /// more than this.
    pub min_improvement: f64,
}

impl Default for CaOptions {
    fn default() -> Self {
        CaOptions {
            restarts: 3,
            seed: 42,
            metric_k: 5,
            min_improvement: 1e-6,
        }
    }
}

/// Extract the feature vector of one (query, entity, attribute) instance.
/// The entity must exist and contain the attribute.
pub fn extract_features(
    kb: &KnowledgeBase,
    store: &WordVectorStore,
    tax: &Taxonomy,
    ann: &QueryAnnotation,
    attribute: &str,
    entity: &str,
    params: &MrfParams,
) -> Result<FeatureVector> {
    let (with_attr, _) = kb.entity_counts(entity, attribute)?;
    if with_attr == 0 {
        return Err(Error::InvalidParameter(format!(
            "attribute `{attribute}` does not occur in entity `{entity}`"
        )));
    }
    let mut f1 = 0.0;
    let mut f3 = 0.0;
    for q_i in &ann.terms {
        f1 += mrf::f3_term_entity(kb, q_i, entity, params.mu2, params.epsilon)?;
        f3 += mrf::f1_term_attr(store, q_i, attribute, params.epsilon);
    }
    let f2 = mrf::f2_attr_entity(kb, attribute, entity, params.mu1, params.epsilon)?;

    // concatenated attribute-name + value text of this (entity, attribute)
    let mut pair_tokens = text::tokenize(attribute);
    let ent = kb.entity(entity).expect("checked above");
    for pair in ent.pairs() {
        if pair.attribute == attribute {
            pair_tokens.extend(text::tokenize(&pair.value));
        }
    }

    let (linked, not_linked) = ann.split_terms();
    let f4 = mean_max_similarity(&linked, &pair_tokens, |a, b| tax.path_similarity(a, b));
    let f5 = mean_max_similarity(&linked, &pair_tokens, |a, b| store.cosine_similarity(a, b));
    let f6 = mean_max_similarity(&not_linked, &pair_tokens, |a, b| tax.path_similarity(a, b));
    let f7 = mean_max_similarity(&not_linked, &pair_tokens, |a, b| {
        store.cosine_similarity(a, b)
    });

    let mut values = [f1, f2, f3, 0.0, 0.0, 0.0, 0.0];
    let mut present = 0b0000_0111u8;
    for (i, sim) in [f4, f5, f6, f7].into_iter().enumerate() {
        if let Some(v) = sim {
            values[3 + i] = v;
            present |= 1 << (3 + i);
        }
    }
    Ok(FeatureVector { values, present })
}

/// Mean over terms of the best defined similarity to any token; `None` when
/// no term has a defined similarity.
fn mean_max_similarity<F>(
    terms: &std::collections::BTreeSet<String>,
    tokens: &[String],
    sim: F,
) -> Option<f64>
where
    F: Fn(&str, &str) -> Option<f64>,
{
    let mut sum = 0.0;
    let mut n = 0usize;
    for term in terms {
        let best = tokens
            .iter()
            .filter_map(|tok| sim(term, tok))
            .fold(None, |acc: Option<f64>, v| {
                Some(acc.map_or(v, |a| a.max(v)))
            });
        if let Some(v) = best {
            sum += v;
            n += 1;
        }
    }
    (n > 0).then(|| sum / n as f64)
}

/// Build training instances for a set of annotated queries: one instance
/// per (query, linked entity, attribute of that entity), graded from qrels
/// (unjudged candidates become grade-0 instances). Linked entities missing
/// from the KB are skipped with a warning.
pub fn build_instances(
    kb: &KnowledgeBase,
    store: &WordVectorStore,
    tax: &Taxonomy,
    annotations: &[QueryAnnotation],
    qrels: &eval::Qrels,
    params: &MrfParams,
) -> Result<Vec<TrainingInstance>> {
    let mut instances = Vec::new();
    for ann in annotations {
        for entity in ann.linked_entities() {
            let Some(ent) = kb.entity(entity) else {
                log::warn!(
                    "query `{}`: linked entity `{entity}` not in KB; skipped",
                    ann.query_id
                );
                continue;
            };
            for attribute in ent.attribute_names() {
                let features = extract_features(kb, store, tax, ann, attribute, entity, params)?;
                instances.push(TrainingInstance {
                    query_id: ann.query_id.clone(),
                    entity: entity.to_string(),
                    attribute: attribute.to_string(),
                    features,
                    grade: qrels.grade(&ann.query_id, attribute).unwrap_or(0),
                });
            }
        }
    }
    Ok(instances)
}

// Attribute-level view of one query's instances: per attribute its grade
// and the instance indices of its supporting entities.
struct QueryGroup {
    qid: String,
    attrs: Vec<(String, u8, Vec<usize>)>,
    judged: Vec<u8>,
}

fn group_by_query(instances: &[TrainingInstance]) -> Vec<QueryGroup> {
    let mut by_query: BTreeMap<&str, BTreeMap<&str, (u8, Vec<usize>)>> = BTreeMap::new();
    for (i, inst) in instances.iter().enumerate() {
        by_query
            .entry(&inst.query_id)
            .or_default()
            .entry(&inst.attribute)
            .or_insert_with(|| (inst.grade, Vec::new()))
            .1
            .push(i);
    }
    by_query
        .into_iter()
        .map(|(qid, attrs)| {
            let attrs: Vec<(String, u8, Vec<usize>)> = attrs
                .into_iter()
                .map(|(a, (g, idx))| (a.to_string(), g, idx))
                .collect();
            let judged = attrs.iter().map(|(_, g, _)| *g).collect();
            QueryGroup {
                qid: qid.to_string(),
                attrs,
                judged,
            }
        })
        .collect()
}

// Attribute ranking of one query under a weight vector: max over
// supporting entities, descending score, ties by name.
fn rank_group(
    group: &QueryGroup,
    instances: &[TrainingInstance],
    weights: &[f64; NUM_FEATURES],
) -> Vec<(String, f64, u8)> {
    let mut scored: Vec<(String, f64, u8)> = group
        .attrs
        .iter()
        .map(|(attr, grade, idxs)| {
            let score = idxs
                .iter()
                .map(|&i| instances[i].features.score(weights))
                .fold(f64::NEG_INFINITY, f64::max);
            (attr.clone(), score, *grade)
        })
        .collect();
    scored.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    scored
}

fn mean_ndcg(
    groups: &[QueryGroup],
    instances: &[TrainingInstance],
    weights: &[f64; NUM_FEATURES],
    k: usize,
) -> f64 {
    let sum: f64 = groups
        .iter()
        .map(|g| {
            let ranked: Vec<u8> = rank_group(g, instances, weights)
                .iter()
                .map(|(_, _, grade)| *grade)
                .collect();
            eval::ndcg_from_grades(&ranked, &g.judged, k)
        })
        .sum();
    sum / groups.len() as f64
}

fn l1_normalize(weights: &mut [f64; NUM_FEATURES]) -> bool {
    let sum: f64 = weights.iter().map(|w| w.abs()).sum();
    if sum < 1e-12 {
        return false;
    }
    for w in weights.iter_mut() {
        *w /= sum;
    }
    true
}

fn random_l1_start(rng: &mut ChaCha8Rng) -> [f64; NUM_FEATURES] {
    loop {
        let mut w = [0.0; NUM_FEATURES];
        for x in &mut w {
            *x = rng.gen_range(-1.0..1.0);
        }
        if l1_normalize(&mut w) {
            return w;
        }
    }
}

/// Train a linear model by Coordinate Ascent on mean NDCG@k. Needs at least
/// two queries and at least one positively graded instance.
pub fn ca_train(instances: &[TrainingInstance], opts: &CaOptions) -> Result<LinearModel> {
    let groups = group_by_query(instances);
    if groups.len() < 2 {
        return Err(Error::Training(format!(
            "need at least 2 queries, got {}",
            groups.len()
        )));
    }
    if !instances.iter().any(|i| i.grade >= 1) {
        return Err(Error::Training(
            "no positively graded instance in the training data".into(),
        ));
    }
    if opts.restarts == 0 {
        return Err(Error::Training("restarts must be >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut best: Option<(f64, [f64; NUM_FEATURES])> = None;
    let mut traces = Vec::with_capacity(opts.restarts);

    for _restart in 0..opts.restarts {
        let mut weights = random_l1_start(&mut rng);
        let mut current = mean_ndcg(&groups, instances, &weights, opts.metric_k);
        let mut trace = vec![current];
        loop {
            let mut improved = false;
            for coord in 0..NUM_FEATURES {
                let scale = if weights[coord].abs() > 1e-12 {
                    weights[coord].abs()
                } else {
                    1.0
                };
                let mut best_move: Option<([f64; NUM_FEATURES], f64)> = None;
                for &delta in &STEP_LADDER {
                    for sign in [1.0, -1.0] {
                        let mut cand = weights;
                        cand[coord] += sign * delta * scale;
                        if !l1_normalize(&mut cand) {
                            continue;
                        }
                        let m = mean_ndcg(&groups, instances, &cand, opts.metric_k);
                        if best_move.as_ref().is_none_or(|(_, bm)| m > *bm) {
                            best_move = Some((cand, m));
                        }
                    }
                }
                if let Some((cand, m)) = best_move {
                    if m > current + opts.min_improvement {
                        weights = cand;
                        current = m;
                        trace.push(m);
                        improved = true;
                    }
                }
            }
            if !improved {
                break;
            }
        }
        traces.push(trace);
        // strict comparison: ties keep the earlier restart
        if best.as_ref().is_none_or(|(bm, _)| current > *bm) {
            best = Some((current, weights));
        }
    }

    let (training_ndcg, weights) = best.unwrap();
    Ok(LinearModel {
        weights,
        training_ndcg,
        restarts: opts.restarts,
        seed: opts.seed,
        folds: None,
        traces,
    })
}

/// Rank a query's candidate attributes with a trained model: one feature
/// vector per (linked entity, attribute), max-aggregated per attribute.
pub fn rank_attributes_ltr(
    kb: &KnowledgeBase,
    store: &WordVectorStore,
    tax: &Taxonomy,
    ann: &QueryAnnotation,
    model: &LinearModel,
    params: &MrfParams,
    cutoff: usize,
) -> Result<Vec<(String, f64)>> {
    if ann.linked_entities().is_empty() {
        log::warn!(
            "query `{}` has no linked entities; emitting empty ranking",
            ann.query_id
        );
        return Ok(Vec::new());
    }
    let mut best: BTreeMap<String, f64> = BTreeMap::new();
    for entity in ann.linked_entities() {
        let ent = kb
            .entity(entity)
            .ok_or_else(|| Error::UnknownEntity(entity.to_string()))?;
        for attribute in ent.attribute_names() {
            let features = extract_features(kb, store, tax, ann, attribute, entity, params)?;
            let score = features.score(&model.weights);
            best.entry(attribute.to_string())
                .and_modify(|s| {
                    if score > *s {
                        *s = score;
                    }
                })
                .or_insert(score);
        }
    }
    let mut ranked: Vec<(String, f64)> = best.into_iter().collect();
    mrf::sort_ranking(&mut ranked);
    ranked.truncate(cutoff);
    Ok(ranked)
}

fn fnv1a(s: &str) -> u64 {
    let mut h = 0xcbf2_9ce4_8422_2325u64;
    for b in s.as_bytes() {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// Stable, input-order-independent fold assignment: query ids ordered by
/// (hash, id), then dealt round-robin, so fold sizes differ by at most one.
pub fn fold_assignment(query_ids: &[String], folds: usize) -> BTreeMap<String, usize> {
    let mut ordered: Vec<&String> = query_ids.iter().collect();
    ordered.sort_by_key(|qid| (fnv1a(qid), (*qid).clone()));
    ordered.dedup();
    ordered
        .into_iter()
        .enumerate()
        .map(|(i, qid)| (qid.clone(), i % folds))
        .collect()
}

/// One fold's trained model and held-out performance.
#[derive(Debug, Clone)]
pub struct FoldReport {
    pub fold: usize,
    pub test_queries: Vec<String>,
    pub model: LinearModel,
    pub test_metrics: eval::QueryMetrics,
}

/// Cross-validation output: per-fold reports plus the pooled run assembled
/// from each query's test-fold model.
#[derive(Debug, Clone)]
pub struct CvReport {
    pub folds: Vec<FoldReport>,
    pub pooled_run: eval::RunList,
    pub pooled_metrics: eval::QueryMetrics,
}

/// Grouped k-fold cross-validation: all instances of a query stay in one
/// fold; each fold's queries are scored by a model trained on the others.
pub fn cross_validate(
    instances: &[TrainingInstance],
    folds: usize,
    opts: &CaOptions,
    tag: &str,
) -> Result<CvReport> {
    let groups = group_by_query(instances);
    if folds < 2 {
        return Err(Error::Training("need at least 2 folds".into()));
    }
    if groups.len() < folds {
        return Err(Error::Training(format!(
            "need at least {folds} queries for {folds}-fold cross-validation, got {}",
            groups.len()
        )));
    }
    let qids: Vec<String> = groups.iter().map(|g| g.qid.clone()).collect();
    let assignment = fold_assignment(&qids, folds);

    let mut fold_reports = Vec::with_capacity(folds);
    let mut pooled_run = eval::RunList::new(tag);
    let mut pooled_sum = eval::QueryMetrics::default();

    for fold in 0..folds {
        let train: Vec<TrainingInstance> = instances
            .iter()
            .filter(|i| assignment[&i.query_id] != fold)
            .cloned()
            .collect();
        let fold_opts = CaOptions {
            seed: opts.seed.wrapping_add(fold as u64),
            ..*opts
        };
        let mut model = ca_train(&train, &fold_opts)?;
        model.folds = Some(folds);

        let mut test_queries = Vec::new();
        let mut fold_sum = eval::QueryMetrics::default();
        for group in groups.iter().filter(|g| assignment[&g.qid] == fold) {
            let ranked = rank_group(group, instances, &model.weights);
            let grades: Vec<u8> = ranked.iter().map(|(_, _, g)| *g).collect();
            let m = eval::metrics_from_grades(&grades, &group.judged, opts.metric_k);
            fold_sum.ndcg += m.ndcg;
            fold_sum.precision += m.precision;
            fold_sum.rr += m.rr;
            fold_sum.ap += m.ap;
            pooled_sum.ndcg += m.ndcg;
            pooled_sum.precision += m.precision;
            pooled_sum.rr += m.rr;
            pooled_sum.ap += m.ap;
            pooled_run.set_ranking(
                &group.qid,
                ranked.into_iter().map(|(a, s, _)| (a, s)).collect(),
            )?;
            test_queries.push(group.qid.clone());
        }
        let n = test_queries.len().max(1) as f64;
        fold_reports.push(FoldReport {
            fold,
            test_queries,
            model,
            test_metrics: eval::QueryMetrics {
                ndcg: fold_sum.ndcg / n,
                precision: fold_sum.precision / n,
                rr: fold_sum.rr / n,
                ap: fold_sum.ap / n,
            },
        });
    }
    let n = groups.len() as f64;
    Ok(CvReport {
        folds: fold_reports,
        pooled_run,
        pooled_metrics: eval::QueryMetrics {
            ndcg: pooled_sum.ndcg / n,
            precision: pooled_sum.precision / n,
            rr: pooled_sum.rr / n,
            ap: pooled_sum.ap / n,
        },
    })
}

/// One row of the feature-importance table.
#[derive(Debug, Clone)]
pub struct AblationRow {
    pub label: String,
    pub ndcg: f64,
    pub delta_pct: f64,
}

/// Feature importance: cross-validated NDCG of the all-feature model, then
/// of each feature used alone as a ranker (sign picked on the training
/// folds). The all-features row comes first, single features sorted by
/// descending NDCG.
pub fn feature_ablation(
    instances: &[TrainingInstance],
    folds: usize,
    opts: &CaOptions,
) -> Result<Vec<AblationRow>> {
    let all = cross_validate(instances, folds, opts, "all")?;
    let all_ndcg = all.pooled_metrics.ndcg;

    let groups = group_by_query(instances);
    let qids: Vec<String> = groups.iter().map(|g| g.qid.clone()).collect();
    let assignment = fold_assignment(&qids, folds);

    let mut singles = Vec::with_capacity(NUM_FEATURES);
    for feature in 0..NUM_FEATURES {
        let mut positive = [0.0; NUM_FEATURES];
        positive[feature] = 1.0;
        let mut negative = [0.0; NUM_FEATURES];
        negative[feature] = -1.0;

        let mut sum = 0.0;
        for fold in 0..folds {
            let train: Vec<&QueryGroup> = groups
                .iter()
                .filter(|g| assignment[&g.qid] != fold)
                .collect();
            let plus = mean_ndcg_ref(&train, instances, &positive, opts.metric_k);
            let minus = mean_ndcg_ref(&train, instances, &negative, opts.metric_k);
            let weights = if minus > plus { negative } else { positive };
            for group in groups.iter().filter(|g| assignment[&g.qid] == fold) {
                let ranked: Vec<u8> = rank_group(group, instances, &weights)
                    .iter()
                    .map(|(_, _, g)| *g)
                    .collect();
                sum += eval::ndcg_from_grades(&ranked, &group.judged, opts.metric_k);
            }
        }
        let ndcg = sum / groups.len() as f64;
        let delta_pct = if all_ndcg == 0.0 {
            0.0
        } else {
            (ndcg - all_ndcg) / all_ndcg * 100.0
        };
        singles.push(AblationRow {
            label: FEATURE_LABELS[feature].to_string(),
            ndcg,
            delta_pct,
        });
    }
    singles.sort_by(|a, b| {
        b.ndcg
            .total_cmp(&a.ndcg)
            .then_with(|| a.label.cmp(&b.label))
    });

    let mut rows = vec![AblationRow {
        label: "f1-f7".to_string(),
        ndcg: all_ndcg,
        delta_pct: 0.0,
    }];
    rows.extend(singles);
    Ok(rows)
}

fn mean_ndcg_ref(
    groups: &[&QueryGroup],
    instances: &[TrainingInstance],
    weights: &[f64; NUM_FEATURES],
    k: usize,
) -> f64 {
    let sum: f64 = groups
        .iter()
        .map(|g| {
            let ranked: Vec<u8> = rank_group(g, instances, weights)
                .iter()
                .map(|(_, _, grade)| *grade)
                .collect();
            eval::ndcg_from_grades(&ranked, &g.judged, k)
        })
        .sum();
    sum / groups.len() as f64
}

/// Write a model in the `CAV1` text format: version line, metadata
/// comments, then the seven labeled weights.
pub fn write_model(model: &LinearModel, out: &mut impl Write) -> std::io::Result<()> {
    writeln!(out, "CAV1")?;
    writeln!(out, "# seed: {}", model.seed)?;
    writeln!(out, "# restarts: {}", model.restarts)?;
    if let Some(folds) = model.folds {
        writeln!(out, "# folds: {folds}")?;
    }
    writeln!(out, "# training_ndcg5: {}", model.training_ndcg)?;
    for (label, w) in FEATURE_LABELS.iter().zip(&model.weights) {
        writeln!(out, "{label} {w}")?;
    }
    Ok(())
}

/// Read a `CAV1` model file.
pub fn read_model(path: &Path) -> Result<LinearModel> {
    let content = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines = content.lines().enumerate();
    let Some((_, first)) = lines.next() else {
        return Err(Error::parse(path, 1, "empty model file"));
    };
    if first.trim() != "CAV1" {
        return Err(Error::parse(path, 1, "not a CAV1 model file"));
    }
    let mut weights = [0.0f64; NUM_FEATURES];
    let mut seen = 0usize;
    let mut meta: BTreeMap<String, String> = BTreeMap::new();
    for (idx, line) in lines {
        let lineno = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            if let Some((key, value)) = comment.split_once(':') {
                meta.insert(key.trim().to_string(), value.trim().to_string());
            }
            continue;
        }
        let Some((label, value)) = line.split_once(' ') else {
            return Err(Error::parse(path, lineno, "expected `fN weight`"));
        };
        if seen >= NUM_FEATURES || label != FEATURE_LABELS[seen] {
            return Err(Error::parse(
                path,
                lineno,
                format!("unexpected weight label `{label}`"),
            ));
        }
        weights[seen] = value
            .trim()
            .parse()
            .map_err(|_| Error::parse(path, lineno, "weight is not a number"))?;
        seen += 1;
    }
    if seen != NUM_FEATURES {
        return Err(Error::parse(
            path,
            0,
            format!("expected {NUM_FEATURES} weights, found {seen}"),
        ));
    }
    let get_num = |key: &str| meta.get(key).and_then(|v| v.parse::<u64>().ok());
    Ok(LinearModel {
        weights,
        training_ndcg: meta
            .get("training_ndcg5")
            .and_then(|v| v.parse().ok())
            .unwrap_or(f64::NAN),
        restarts: get_num("restarts").unwrap_or(0) as usize,
        seed: get_num("seed").unwrap_or(0),
        folds: get_num("folds").map(|f| f as usize),
        traces: Vec::new(),
    })
}

/// Dump instances in the common LTR text format:
/// `grade qid:Q 1:v .. 7:v # entity attribute`.
pub fn write_feature_dump(
    instances: &[TrainingInstance],
    out: &mut impl Write,
) -> std::io::Result<()> {
    for inst in instances {
        write!(out, "{} qid:{}", inst.grade, inst.query_id)?;
        for (i, v) in inst.features.values.iter().enumerate() {
            write!(out, " {}:{}", i + 1, v)?;
        }
        writeln!(out, " # {} {}", inst.entity, inst.attribute)?;
    }
    Ok(())
}

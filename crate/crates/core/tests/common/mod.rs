//! Shared test fixtures, independent brute-force scorers, and synthetic
//! dataset generators.
//!
//! The brute-force scorers deliberately avoid the library's index and
//! statistics caches: they recount everything from the raw entity pair
//! lists, so agreement with the library is evidence, not circularity.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use attrank::embedding::WordVectorStore;
use attrank::kb::KnowledgeBase;
use attrank::linker::{EntityLink, QueryAnnotation};
use attrank::ltr::{FeatureVector, TrainingInstance, NUM_FEATURES};
use attrank::mrf::MrfParams;
use attrank::text;

pub fn mini_kb() -> KnowledgeBase {
    let mut kb = KnowledgeBase::new();
    kb.add_triple("Lincoln", "spouse", "Mary_Todd");
    kb.add_triple("Lincoln", "deathPlace", "Washington");
    kb.add_triple("Lincoln", "party", "Whig");
    kb.add_triple("Einstein", "spouse", "Mileva");
    kb.add_triple("Einstein", "field", "Physics");
    kb
}

pub fn annotation(qid: &str, query_text: &str, links: &[(&str, usize, usize)]) -> QueryAnnotation {
    QueryAnnotation {
        query_id: qid.to_string(),
        text: query_text.to_string(),
        terms: text::tokenize(query_text),
        links: links
            .iter()
            .map(|(e, s, t)| EntityLink {
                entity: e.to_string(),
                start: *s,
                end: *t,
                confidence: 1.0,
            })
            .collect(),
    }
}

// ---------------------------------------------------------------------------
// brute-force MRF scorer: straight-line evaluation from raw pair lists
// ---------------------------------------------------------------------------

fn bf_entity_attr_fraction(kb: &KnowledgeBase, entity: &str, attribute: &str) -> f64 {
    let ent = kb.entity(entity).expect("entity exists");
    let with = ent
        .pairs()
        .iter()
        .filter(|p| p.attribute == attribute)
        .count();
    with as f64 / ent.pairs().len() as f64
}

fn bf_global_attr_fraction(kb: &KnowledgeBase, attribute: &str) -> f64 {
    let mut with = 0usize;
    let mut total = 0usize;
    for ent in kb.entities() {
        for pair in ent.pairs() {
            total += 1;
            if pair.attribute == attribute {
                with += 1;
            }
        }
    }
    with as f64 / total as f64
}

fn pair_contains_term(attribute: &str, value: &str, term: &str) -> bool {
    text::tokenize(attribute).iter().any(|t| t == term)
        || text::tokenize(value).iter().any(|t| t == term)
}

fn bf_entity_term_fraction(kb: &KnowledgeBase, entity: &str, term: &str) -> f64 {
    let ent = kb.entity(entity).expect("entity exists");
    let with = ent
        .pairs()
        .iter()
        .filter(|p| pair_contains_term(&p.attribute, &p.value, term))
        .count();
    with as f64 / ent.pairs().len() as f64
}

fn bf_global_term_fraction(kb: &KnowledgeBase, term: &str) -> f64 {
    let mut with = 0usize;
    let mut total = 0usize;
    for ent in kb.entities() {
        for pair in ent.pairs() {
            total += 1;
            if pair_contains_term(&pair.attribute, &pair.value, term) {
                with += 1;
            }
        }
    }
    with as f64 / total as f64
}

fn bf_f1(store: &WordVectorStore, term: &str, attribute: &str, epsilon: f64) -> f64 {
    let Some(v_term) = store.vector(term) else {
        return epsilon.ln();
    };
    let mut sum = 0.0;
    let mut n = 0usize;
    for w in text::tokenize(attribute) {
        if let Some(v_w) = store.vector(&w) {
            let dist = v_term
                .iter()
                .zip(v_w)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt()
                / 2.0;
            sum += 1.0 - dist;
            n += 1;
        }
    }
    let mean = if n == 0 { epsilon } else { sum / n as f64 };
    mean.max(epsilon).ln()
}

/// Eq.-by-eq evaluation of the ranking function over the linked entities.
pub fn bf_mrf_score(
    kb: &KnowledgeBase,
    store: &WordVectorStore,
    ann: &QueryAnnotation,
    attribute: &str,
    params: &MrfParams,
) -> f64 {
    let mut total = 0.0;
    for entity in ann.linked_entities() {
        let f1_sum: f64 = ann
            .terms
            .iter()
            .map(|t| bf_f1(store, t, attribute, params.epsilon))
            .sum();
        let f2 = {
            let arg = params.mu1 * bf_entity_attr_fraction(kb, entity, attribute)
                + (1.0 - params.mu1) * bf_global_attr_fraction(kb, attribute);
            arg.max(params.epsilon).ln()
        };
        let mut f3_sum = 0.0;
        for term in &ann.terms {
            let arg = params.mu2 * bf_entity_term_fraction(kb, entity, term)
                + (1.0 - params.mu2) * bf_global_term_fraction(kb, term);
            f3_sum += arg.max(params.epsilon).ln();
        }
        total += params.lambda1 * f1_sum + params.lambda2 * f2 + params.lambda3 * f3_sum;
    }
    total
}

/// All candidate attributes scored by the brute-force scorer, sorted like
/// the library (score desc, name asc).
pub fn bf_rank_attributes(
    kb: &KnowledgeBase,
    store: &WordVectorStore,
    ann: &QueryAnnotation,
    params: &MrfParams,
) -> Vec<(String, f64)> {
    let mut candidates: BTreeSet<String> = BTreeSet::new();
    for entity in ann.linked_entities() {
        for pair in kb.entity(entity).expect("entity exists").pairs() {
            candidates.insert(pair.attribute.clone());
        }
    }
    let mut ranked: Vec<(String, f64)> = candidates
        .into_iter()
        .map(|a| {
            let s = bf_mrf_score(kb, store, ann, &a, params);
            (a, s)
        })
        .collect();
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    ranked
}

// ---------------------------------------------------------------------------
// brute-force lexical scorers over raw (entity, attribute) documents
// ---------------------------------------------------------------------------

pub struct RawDoc {
    pub entity: String,
    pub attribute: String,
    pub title: Vec<String>,
    pub content: Vec<String>,
    pub catchall: Vec<String>,
}

/// Documents built directly from the KB, sorted by (entity, attribute).
pub fn raw_docs(kb: &KnowledgeBase) -> Vec<RawDoc> {
    let mut docs = Vec::new();
    for ent in kb.entities() {
        let mut attrs: Vec<&str> = ent.pairs().iter().map(|p| p.attribute.as_str()).collect();
        attrs.sort_unstable();
        attrs.dedup();
        for attribute in attrs {
            let title = text::tokenize(attribute);
            let mut content = Vec::new();
            for pair in ent.pairs() {
                if pair.attribute == attribute {
                    content.extend(text::tokenize(&pair.value));
                }
            }
            let mut catchall = title.clone();
            catchall.extend(content.iter().cloned());
            docs.push(RawDoc {
                entity: ent.id().to_string(),
                attribute: attribute.to_string(),
                title,
                content,
                catchall,
            });
        }
    }
    docs.sort_by(|a, b| {
        (a.entity.as_str(), a.attribute.as_str()).cmp(&(b.entity.as_str(), b.attribute.as_str()))
    });
    docs
}

fn count_tf(tokens: &[String], term: &str) -> usize {
    tokens.iter().filter(|t| *t == term).count()
}

/// BM25 over the catch-all field; returns (doc key, score) for documents
/// containing at least one query term, accumulated term by term exactly
/// like the definition.
pub fn bf_bm25(
    docs: &[RawDoc],
    query: &[String],
    k1: f64,
    b: f64,
) -> BTreeMap<(String, String), f64> {
    let n = docs.len() as f64;
    let total_len: u64 = docs.iter().map(|d| d.catchall.len() as u64).sum();
    let avgdl = total_len as f64 / n;
    let mut scores: BTreeMap<(String, String), f64> = BTreeMap::new();
    for term in query {
        let df = docs
            .iter()
            .filter(|d| count_tf(&d.catchall, term) > 0)
            .count() as f64;
        if df == 0.0 {
            continue;
        }
        let idf = ((n - df + 0.5) / (df + 0.5) + 1.0).ln();
        for doc in docs {
            let tf = count_tf(&doc.catchall, term) as f64;
            if tf == 0.0 {
                continue;
            }
            let dl = doc.catchall.len() as f64;
            let norm = (tf * (k1 + 1.0)) / (tf + k1 * (1.0 - b + b * dl / avgdl));
            *scores
                .entry((doc.entity.clone(), doc.attribute.clone()))
                .or_insert(0.0) += idf * norm;
        }
    }
    scores
}

fn field_prob(docs: &[RawDoc], pick: impl Fn(&RawDoc) -> &[String], term: &str) -> f64 {
    let total: u64 = docs.iter().map(|d| pick(d).len() as u64).sum();
    let cf: u64 = docs.iter().map(|d| count_tf(pick(d), term) as u64).sum();
    if cf == 0 {
        1.0 / (total as f64 + 1.0)
    } else {
        cf as f64 / total as f64
    }
}

/// Dirichlet query likelihood on the catch-all field; every document
/// scored.
pub fn bf_lm(docs: &[RawDoc], query: &[String], mu: f64) -> BTreeMap<(String, String), f64> {
    let mut scores = BTreeMap::new();
    for doc in docs {
        scores.insert((doc.entity.clone(), doc.attribute.clone()), 0.0f64);
    }
    for term in query {
        let p_c = field_prob(docs, |d| &d.catchall, term);
        for doc in docs {
            let tf = count_tf(&doc.catchall, term) as f64;
            let dl = doc.catchall.len() as f64;
            *scores
                .get_mut(&(doc.entity.clone(), doc.attribute.clone()))
                .unwrap() += ((tf + mu * p_c) / (dl + mu)).ln();
        }
    }
    scores
}

/// Two-field mixture of Dirichlet language models.
pub fn bf_mlm(
    docs: &[RawDoc],
    query: &[String],
    w_title: f64,
    w_content: f64,
    mu: f64,
) -> BTreeMap<(String, String), f64> {
    let mut scores = BTreeMap::new();
    for doc in docs {
        scores.insert((doc.entity.clone(), doc.attribute.clone()), 0.0f64);
    }
    for term in query {
        let p_c_title = field_prob(docs, |d| &d.title, term);
        let p_c_content = field_prob(docs, |d| &d.content, term);
        for doc in docs {
            let p_title = (count_tf(&doc.title, term) as f64 + mu * p_c_title)
                / (doc.title.len() as f64 + mu);
            let p_content = (count_tf(&doc.content, term) as f64 + mu * p_c_content)
                / (doc.content.len() as f64 + mu);
            *scores
                .get_mut(&(doc.entity.clone(), doc.attribute.clone()))
                .unwrap() += (w_title * p_title + w_content * p_content).ln();
        }
    }
    scores
}

// ---------------------------------------------------------------------------
// random corpora
// ---------------------------------------------------------------------------

pub const ATTR_POOL: [&str; 8] = [
    "spouse",
    "deathPlace",
    "birthPlace",
    "party",
    "field",
    "award",
    "child",
    "knownFor",
];

pub const VALUE_POOL: [&str; 12] = [
    "mary",
    "todd",
    "washington",
    "whig",
    "physics",
    "mileva",
    "berlin",
    "alice",
    "bob",
    "king",
    "novel",
    "prize",
];

/// A random KB with up to 10 entities and up to 6 attribute draws each
/// (repeats make multi-valued attributes).
pub fn random_kb(rng: &mut ChaCha8Rng) -> KnowledgeBase {
    let mut kb = KnowledgeBase::new();
    let n_entities = rng.gen_range(1..=10);
    for e in 0..n_entities {
        let id = format!("E{e}");
        let n_pairs = rng.gen_range(1..=6);
        for _ in 0..n_pairs {
            let attr = ATTR_POOL[rng.gen_range(0..ATTR_POOL.len())];
            let n_words = rng.gen_range(1..=3);
            let value: Vec<&str> = (0..n_words)
                .map(|_| VALUE_POOL[rng.gen_range(0..VALUE_POOL.len())])
                .collect();
            kb.add_triple(&id, attr, &value.join(" "));
        }
    }
    kb
}

/// A random unit-vector store covering roughly 70% of the token pool, so
/// out-of-vocabulary handling is exercised.
pub fn random_store(rng: &mut ChaCha8Rng) -> WordVectorStore {
    let mut tokens: Vec<String> = VALUE_POOL.iter().map(|s| s.to_string()).collect();
    for attr in ATTR_POOL {
        tokens.extend(text::tokenize(attr));
    }
    tokens.sort();
    tokens.dedup();
    let dim = 4;
    let mut rows = Vec::new();
    for token in tokens {
        if rng.gen_bool(0.7) {
            let v: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0f64)).collect();
            if v.iter().map(|x| x * x).sum::<f64>() > 1e-6 {
                rows.push((token, v));
            }
        }
    }
    if rows.is_empty() {
        rows.push(("spouse".to_string(), vec![1.0, 0.0, 0.0, 0.0]));
    }
    WordVectorStore::from_vectors(dim, rows).unwrap()
}

/// A random query annotation over the KB's entities and token pools.
pub fn random_annotation(rng: &mut ChaCha8Rng, kb: &KnowledgeBase, qid: &str) -> QueryAnnotation {
    let ids: Vec<String> = kb.entities().map(|e| e.id().to_string()).collect();
    let n_terms = rng.gen_range(1..=4);
    let mut words = Vec::new();
    for _ in 0..n_terms {
        if rng.gen_bool(0.5) {
            words.push(VALUE_POOL[rng.gen_range(0..VALUE_POOL.len())].to_string());
        } else {
            let attr = ATTR_POOL[rng.gen_range(0..ATTR_POOL.len())];
            let toks = text::tokenize(attr);
            words.push(toks[rng.gen_range(0..toks.len())].clone());
        }
    }
    let n_links = rng.gen_range(1..=ids.len().min(3));
    let mut links = Vec::new();
    for _ in 0..n_links {
        links.push((ids[rng.gen_range(0..ids.len())].clone(), 0usize, 1usize));
    }
    let link_refs: Vec<(&str, usize, usize)> =
        links.iter().map(|(e, s, t)| (e.as_str(), *s, *t)).collect();
    annotation(qid, &words.join(" "), &link_refs)
}

// ---------------------------------------------------------------------------
// synthetic datasets for the acceptance suite
// ---------------------------------------------------------------------------

/// Feature-space dataset: 50 queries x 10 candidate attributes with grades
/// generated by a fixed linear combination of three informative features,
/// so no single feature orders queries as well as the combination.
pub fn synthetic_feature_dataset(seed: u64) -> Vec<TrainingInstance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let true_weights = [0.0, 0.2, 0.45, 0.0, 0.35, 0.0, 0.0];
    let mut instances = Vec::new();
    for q in 0..50 {
        let qid = format!("q{q:02}");
        let mut rows: Vec<([f64; NUM_FEATURES], f64)> = Vec::new();
        for _ in 0..10 {
            let mut values = [0.0; NUM_FEATURES];
            for v in &mut values {
                *v = rng.gen_range(0.0..1.0);
            }
            let score: f64 = values.iter().zip(&true_weights).map(|(v, w)| v * w).sum();
            rows.push((values, score));
        }
        let mut order: Vec<usize> = (0..rows.len()).collect();
        order.sort_by(|&a, &b| rows[b].1.total_cmp(&rows[a].1));
        let mut grades = vec![0u8; rows.len()];
        grades[order[0]] = 2;
        grades[order[1]] = 1;
        grades[order[2]] = 1;
        for (i, (values, _)) in rows.into_iter().enumerate() {
            instances.push(TrainingInstance {
                query_id: qid.clone(),
                entity: "E".to_string(),
                attribute: format!("attr{i}"),
                features: FeatureVector {
                    values,
                    present: 0x7f,
                },
                grade: grades[i],
            });
        }
    }
    instances
}

/// Attribute families and the synonym each query uses in place of the
/// attribute name.
pub const SYNONYM_PAIRS: [(&str, &str); 10] = [
    ("spouse", "wife"),
    ("birthplace", "born"),
    ("residence", "home"),
    ("employer", "boss"),
    ("award", "prize"),
    ("genre", "style"),
    ("author", "writer"),
    ("creator", "maker"),
    ("budget", "cost"),
    ("species", "animal"),
];

pub struct SynonymCorpus {
    pub kb: KnowledgeBase,
    pub store: WordVectorStore,
    pub annotations: Vec<QueryAnnotation>,
    pub qrels: attrank::eval::Qrels,
}

/// KB + embeddings + 50 queries where the query word for the target
/// attribute is an embedding-space synonym that never occurs in any
/// document text, starving exact-match rankers of signal.
pub fn synonym_corpus() -> SynonymCorpus {
    let mut kb = KnowledgeBase::new();
    let n_entities = 30;
    for e in 0..n_entities {
        let id = format!("E{e:02}");
        for j in 0..6 {
            let (attr, _) = SYNONYM_PAIRS[(e + j) % SYNONYM_PAIRS.len()];
            kb.add_triple(&id, attr, &format!("v{}", (e * 7 + j * 3) % 40));
        }
    }

    // unit vectors: attribute word i on axis i; its synonym tilted toward a
    // shared extra axis, cosine ~0.98; different families orthogonal
    let dim = SYNONYM_PAIRS.len() + 1;
    let tilt = 0.2f64;
    let mut rows: Vec<(String, Vec<f64>)> = Vec::new();
    for (i, (attr, syn)) in SYNONYM_PAIRS.iter().enumerate() {
        let mut attr_vec = vec![0.0; dim];
        attr_vec[i] = 1.0;
        rows.push((attr.to_string(), attr_vec));
        let mut syn_vec = vec![0.0; dim];
        syn_vec[i] = (1.0 - tilt * tilt).sqrt();
        syn_vec[dim - 1] = tilt;
        rows.push((syn.to_string(), syn_vec));
    }
    let store = WordVectorStore::from_vectors(dim, rows).unwrap();

    let mut annotations = Vec::new();
    let mut qrels = attrank::eval::Qrels::new();
    for q in 0..50 {
        let (attr, syn) = SYNONYM_PAIRS[q % SYNONYM_PAIRS.len()];
        // rotate over the entities that carry the target attribute
        let candidates: Vec<String> = (0..n_entities)
            .map(|e| format!("E{e:02}"))
            .filter(|id| {
                kb.entity(id)
                    .map(|ent| ent.pairs().iter().any(|p| p.attribute == attr))
                    .unwrap_or(false)
            })
            .collect();
        let entity = candidates[(q / SYNONYM_PAIRS.len()) % candidates.len()].clone();
        let qid = format!("q{q:02}");
        let entity_token = entity.to_lowercase();
        let ann = annotation(&qid, &format!("{syn} {entity_token}"), &[(&entity, 1, 2)]);
        annotations.push(ann);
        qrels.insert(&qid, attr, 2).unwrap();
    }
    SynonymCorpus {
        kb,
        store,
        annotations,
        qrels,
    }
}

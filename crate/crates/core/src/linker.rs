//! Query annotations: linked entities and the linked / not-linked term split.
//!
//! Annotations normally come from external entity linkers and are ingested
//! from TSV; the contract is the schema, not the linker. A dictionary linker
//! over exact entity-id matches is included so tests and small setups work
//! without external services.
//!
//! Annotation TSV: `qid<TAB>query_text<TAB>entity_id<TAB>start_token<TAB>
//! end_token<TAB>confidence`, one row per link, rows with the same qid
//! merged. A two-column row `qid<TAB>query_text` declares a query without
//! links. Spans are half-open `[start, end)` over the normalized token
//! positions of the query text.

use std::collections::BTreeSet;
use std::io::BufRead;
use std::path::Path;

use crate::error::{Error, Result};
use crate::kb::KnowledgeBase;
use crate::text;

/// One entity mention: the linked entity, the token span, and the linker's
/// confidence.
#[derive(Debug, Clone, PartialEq)]
pub struct EntityLink {
    pub entity: String,
    pub start: usize,
    pub end: usize,
    pub confidence: f64,
}

/// A query with its normalized terms and entity links.
#[derive(Debug, Clone, PartialEq)]
pub struct QueryAnnotation {
    pub query_id: String,
    pub text: String,
    pub terms: Vec<String>,
    pub links: Vec<EntityLink>,
}

impl QueryAnnotation {
    /// Distinct linked entity ids, sorted (annotations from several linkers
    /// are merged by taking the union of entity ids).
    pub fn linked_entities(&self) -> BTreeSet<&str> {
        self.links.iter().map(|l| l.entity.as_str()).collect()
    }

    /// Partition the term set into (linked, not-linked): a term is linked
    /// iff some mention span covers one of its positions. The two sets are
    /// disjoint and cover all terms.
    pub fn split_terms(&self) -> (BTreeSet<String>, BTreeSet<String>) {
        let mut covered = vec![false; self.terms.len()];
        for link in &self.links {
            for c in covered[link.start..link.end.min(self.terms.len())].iter_mut() {
                *c = true;
            }
        }
        let mut linked = BTreeSet::new();
        for (i, term) in self.terms.iter().enumerate() {
            if covered[i] {
                linked.insert(term.clone());
            }
        }
        let not_linked = self
            .terms
            .iter()
            .filter(|t| !linked.contains(*t))
            .cloned()
            .collect();
        (linked, not_linked)
    }

    /// Drop stopword tokens from the term list, remapping link spans. Links
    /// whose span becomes empty are dropped.
    pub fn without_stopwords(&self, stoplist: &BTreeSet<String>) -> QueryAnnotation {
        let keep: Vec<bool> = self.terms.iter().map(|t| !stoplist.contains(t)).collect();
        // kept_before[i] = number of kept tokens strictly before position i
        let mut kept_before = vec![0usize; self.terms.len() + 1];
        for i in 0..self.terms.len() {
            kept_before[i + 1] = kept_before[i] + usize::from(keep[i]);
        }
        let terms: Vec<String> = self
            .terms
            .iter()
            .zip(&keep)
            .filter(|(_, &k)| k)
            .map(|(t, _)| t.clone())
            .collect();
        let links = self
            .links
            .iter()
            .filter_map(|l| {
                let start = kept_before[l.start];
                let end = kept_before[l.end.min(self.terms.len())];
                (start < end).then(|| EntityLink {
                    entity: l.entity.clone(),
                    start,
                    end,
                    confidence: l.confidence,
                })
            })
            .collect();
        QueryAnnotation {
            query_id: self.query_id.clone(),
            text: self.text.clone(),
            terms,
            links,
        }
    }
}

/// Load annotations, merging rows by query id (order of first appearance).
pub fn load_annotations(path: &Path) -> Result<Vec<QueryAnnotation>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let reader = std::io::BufReader::new(file);
    let mut order: Vec<String> = Vec::new();
    let mut by_id: std::collections::HashMap<String, QueryAnnotation> =
        std::collections::HashMap::new();

    for (idx, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let lineno = idx + 1;
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        let (qid, qtext) = match fields.len() {
            2 | 6 => (fields[0], fields[1]),
            n => {
                return Err(Error::parse(
                    path,
                    lineno,
                    format!("expected 2 or 6 tab-separated fields, found {n}"),
                ))
            }
        };
        if qid.is_empty() {
            return Err(Error::parse(path, lineno, "empty query id"));
        }
        let ann = by_id.entry(qid.to_string()).or_insert_with(|| {
            order.push(qid.to_string());
            QueryAnnotation {
                query_id: qid.to_string(),
                text: qtext.to_string(),
                terms: text::tokenize(qtext),
                links: Vec::new(),
            }
        });
        if ann.text != qtext {
            return Err(Error::parse(
                path,
                lineno,
                format!("query `{qid}` repeated with different text"),
            ));
        }
        if fields.len() == 2 {
            continue;
        }
        let entity = fields[2];
        if entity.is_empty() {
            return Err(Error::parse(path, lineno, "empty entity id"));
        }
        let start: usize = fields[3]
            .parse()
            .map_err(|_| Error::parse(path, lineno, "start_token is not an integer"))?;
        let end: usize = fields[4]
            .parse()
            .map_err(|_| Error::parse(path, lineno, "end_token is not an integer"))?;
        let confidence: f64 = fields[5]
            .parse()
            .map_err(|_| Error::parse(path, lineno, "confidence is not a number"))?;
        if !(0.0..=1.0).contains(&confidence) {
            return Err(Error::parse(
                path,
                lineno,
                format!("confidence {confidence} outside [0, 1]"),
            ));
        }
        if start >= end || end > ann.terms.len() {
            return Err(Error::parse(
                path,
                lineno,
                format!(
                    "span [{start}, {end}) out of range for {}-term query",
                    ann.terms.len()
                ),
            ));
        }
        ann.links.push(EntityLink {
            entity: entity.to_string(),
            start,
            end,
            confidence,
        });
    }

    Ok(order
        .into_iter()
        .map(|qid| by_id.remove(&qid).unwrap())
        .collect())
}

/// Load a stoplist: one token per line, `#` comments skipped. Tokens are
/// normalized with the shared tokenizer.
pub fn load_stoplist(path: &Path) -> Result<BTreeSet<String>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let reader = std::io::BufReader::new(file);
    let mut set = BTreeSet::new();
    for line in reader.lines() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        set.extend(text::tokenize(&line));
    }
    Ok(set)
}

/// Exact-match fallback linker: links every maximal token n-gram equal to
/// the normalized tokens of a KB entity id, confidence 1.0. Overlaps are
/// resolved longest-first, ties leftmost. Deterministic and idempotent.
pub fn dictionary_link(query_id: &str, query_text: &str, kb: &KnowledgeBase) -> QueryAnnotation {
    let terms = text::tokenize(query_text);
    let mut covered = vec![false; terms.len()];
    let mut links: Vec<EntityLink> = Vec::new();
    for n in (1..=terms.len()).rev() {
        for start in 0..=terms.len() - n {
            let end = start + n;
            if covered[start..end].iter().any(|&c| c) {
                continue;
            }
            let key = terms[start..end].join(" ");
            if let Some(ids) = kb.entities_by_normalized_id(&key) {
                for c in covered[start..end].iter_mut() {
                    *c = true;
                }
                for id in ids {
                    links.push(EntityLink {
                        entity: id.clone(),
                        start,
                        end,
                        confidence: 1.0,
                    });
                }
            }
        }
    }
    links.sort_by(|a, b| (a.start, a.end, &a.entity).cmp(&(b.start, b.end, &b.entity)));
    QueryAnnotation {
        query_id: query_id.to_string(),
        text: query_text.to_string(),
        terms,
        links,
    }
}

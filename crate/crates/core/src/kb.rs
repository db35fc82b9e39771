//! Knowledge base of entity attribute-value pairs.
//!
//! Each entity is a list of `<attribute, value>` pairs; the store also keeps
//! the global pair-pool statistics (pair count, per-attribute pair counts,
//! per-term pair counts) that the smoothed feature functions in [`crate::mrf`]
//! read as their background model.
//!
//! File format: UTF-8 TSV with three columns `entity<TAB>attribute<TAB>value`.
//! Lines starting with `#` are comments. There is no escaping; tabs are
//! forbidden inside fields. Multi-valued attributes are one line per value.

use std::collections::{BTreeMap, BTreeSet};
use std::io::BufRead;
use std::path::Path;

use crate::error::{Error, Result};
use crate::text;

/// One `<attribute, value>` pair of an entity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AttributeValuePair {
    pub attribute: String,
    pub value: String,
}

/// An entity: an identifier plus its ordered pair list.
#[derive(Debug, Clone)]
pub struct Entity {
    id: String,
    pairs: Vec<AttributeValuePair>,
    // Token set (attribute-name tokens plus value tokens) per pair, built at
    // insertion time so term matching does not re-tokenize on every call.
    pair_tokens: Vec<BTreeSet<String>>,
}

impl Entity {
    pub fn id(&self) -> &str {
        &self.id
    }

    /// Pairs in input order. An attribute name may repeat (multi-valued).
    pub fn pairs(&self) -> &[AttributeValuePair] {
        &self.pairs
    }

    /// Distinct attribute names of this entity, sorted.
    pub fn attribute_names(&self) -> BTreeSet<&str> {
        self.pairs.iter().map(|p| p.attribute.as_str()).collect()
    }

    fn count_attr(&self, attribute: &str) -> usize {
        self.pairs
            .iter()
            .filter(|p| p.attribute == attribute)
            .count()
    }

    fn count_term(&self, term: &str) -> usize {
        self.pair_tokens.iter().filter(|t| t.contains(term)).count()
    }
}

/// The attribute-value store plus global pair-pool statistics.
#[derive(Debug, Clone, Default)]
pub struct KnowledgeBase {
    entities: BTreeMap<String, Entity>,
    global_pair_count: usize,
    global_attr_counts: BTreeMap<String, usize>,
    global_term_pair_counts: BTreeMap<String, usize>,
    // Entity ids under their normalized-token form, for value-to-entity
    // matching and the dictionary linker.
    normalized_ids: BTreeMap<String, BTreeSet<String>>,
}

impl KnowledgeBase {
    pub fn new() -> Self {
        Self::default()
    }

    /// Add one `entity<TAB>attribute<TAB>value` triple, updating all global
    /// statistics. Loading is single-threaded; after that the store is
    /// immutable and safe to share across readers.
    pub fn add_triple(&mut self, entity: &str, attribute: &str, value: &str) {
        let ent = self
            .entities
            .entry(entity.to_string())
            .or_insert_with(|| Entity {
                id: entity.to_string(),
                pairs: Vec::new(),
                pair_tokens: Vec::new(),
            });
        let mut tokens = text::token_set(attribute);
        tokens.extend(text::tokenize(value));
        ent.pairs.push(AttributeValuePair {
            attribute: attribute.to_string(),
            value: value.to_string(),
        });
        for token in &tokens {
            *self
                .global_term_pair_counts
                .entry(token.clone())
                .or_insert(0) += 1;
        }
        ent.pair_tokens.push(tokens);
        self.global_pair_count += 1;
        *self
            .global_attr_counts
            .entry(attribute.to_string())
            .or_insert(0) += 1;
        self.normalized_ids
            .entry(text::normalized_key(entity))
            .or_default()
            .insert(entity.to_string());
    }

    pub fn entity(&self, id: &str) -> Option<&Entity> {
        self.entities.get(id)
    }

    pub fn entities(&self) -> impl Iterator<Item = &Entity> {
        self.entities.values()
    }

    pub fn entity_count(&self) -> usize {
        self.entities.len()
    }

    /// Total number of pairs over all entities (the size of the global pool).
    pub fn global_pair_count(&self) -> usize {
        self.global_pair_count
    }

    /// Number of pairs in the global pool whose attribute name is `attribute`.
    pub fn global_attr_count(&self, attribute: &str) -> usize {
        self.global_attr_counts.get(attribute).copied().unwrap_or(0)
    }

    /// Number of pairs in the global pool containing `term` among the tokens
    /// of the attribute name or the value.
    pub fn global_term_pair_count(&self, term: &str) -> usize {
        self.global_term_pair_counts.get(term).copied().unwrap_or(0)
    }

    /// Entity ids whose normalized token form equals the given key.
    pub fn entities_by_normalized_id(&self, key: &str) -> Option<&BTreeSet<String>> {
        self.normalized_ids.get(key)
    }

    /// `(pairs with attribute == a, total pairs)` for one entity.
    pub fn entity_counts(&self, entity: &str, attribute: &str) -> Result<(usize, usize)> {
        let ent = self
            .entities
            .get(entity)
            .ok_or_else(|| Error::UnknownEntity(entity.to_string()))?;
        Ok((ent.count_attr(attribute), ent.pairs.len()))
    }

    /// `(pairs containing term, total pairs)` for one entity. `term` must be
    /// a normalized token (see [`crate::text::tokenize`]). A term occurring
    /// twice in one value still counts the pair once.
    pub fn term_match_counts(&self, entity: &str, term: &str) -> Result<(usize, usize)> {
        let ent = self
            .entities
            .get(entity)
            .ok_or_else(|| Error::UnknownEntity(entity.to_string()))?;
        Ok((ent.count_term(term), ent.pairs.len()))
    }
}

/// Load a knowledge base from a TSV file.
pub fn load_kb(path: &Path) -> Result<KnowledgeBase> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let reader = std::io::BufReader::new(file);
    let mut kb = KnowledgeBase::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let lineno = idx + 1;
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 3 {
            return Err(Error::parse(
                path,
                lineno,
                format!("expected 3 tab-separated fields, found {}", fields.len()),
            ));
        }
        if fields[0].is_empty() {
            return Err(Error::parse(path, lineno, "empty entity id"));
        }
        if fields[1].is_empty() {
            return Err(Error::parse(path, lineno, "empty attribute name"));
        }
        kb.add_triple(fields[0], fields[1], fields[2]);
    }
    if kb.entity_count() == 0 {
        return Err(Error::EmptyKb);
    }
    Ok(kb)
}

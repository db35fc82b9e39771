//! Lexical baselines over (entity, attribute) documents.
//!
//! Every distinct (entity, attribute) pair becomes one document with a
//! title field (the attribute-name tokens) and a content field (the tokens
//! of all values of that attribute in that entity); a catch-all field
//! concatenates both. BM25 and the Dirichlet-smoothed language model score
//! the catch-all field; the two-field mixture model interpolates per-field
//! Dirichlet estimates (title/content weights 0.2/0.8 by default).
//!
//! Doc ids serialize as `entity_id::attribute`. The index persists as a
//! versioned binary snapshot with a magic header.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::kb::KnowledgeBase;
use crate::text;

/// Document identity: one (entity, attribute) pair.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DocId {
    pub entity: String,
    pub attribute: String,
}

impl fmt::Display for DocId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}::{}", self.entity, self.attribute)
    }
}

/// A scored document.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoredDoc {
    pub doc: DocId,
    pub score: f64,
}

/// One (entity, attribute) document before indexing: the attribute-name
/// tokens as the title and the tokens of all its values as the content.
#[derive(Debug, Clone, PartialEq)]
pub struct AttrDocument {
    pub doc_id: DocId,
    pub title_field: Vec<String>,
    pub content_field: Vec<String>,
}

/// Materialize the document collection of a KB, one document per distinct
/// (entity, attribute), ordered by doc id.
pub fn attr_documents(kb: &KnowledgeBase) -> Vec<AttrDocument> {
    let mut docs = Vec::new();
    for entity in kb.entities() {
        for attribute in entity.attribute_names() {
            let title_field = text::tokenize(attribute);
            let mut content_field = Vec::new();
            for pair in entity.pairs() {
                if pair.attribute == attribute {
                    content_field.extend(text::tokenize(&pair.value));
                }
            }
            docs.push(AttrDocument {
                doc_id: DocId {
                    entity: entity.id().to_string(),
                    attribute: attribute.to_string(),
                },
                title_field,
                content_field,
            });
        }
    }
    docs
}

/// Which field to read.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Field {
    Title,
    Content,
    CatchAll,
}

/// Postings, lengths, and collection statistics of one field.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FieldIndex {
    // term -> (doc index, term frequency), sorted by doc index
    postings: BTreeMap<String, Vec<(u32, u32)>>,
    doc_lengths: Vec<u32>,
    total_length: u64,
    // term -> collection term frequency
    collection_tf: BTreeMap<String, u64>,
}

impl FieldIndex {
    fn add_doc(&mut self, doc: u32, tokens: &[String]) {
        let mut tf: BTreeMap<&str, u32> = BTreeMap::new();
        for t in tokens {
            *tf.entry(t.as_str()).or_insert(0) += 1;
        }
        for (term, freq) in tf {
            self.postings
                .entry(term.to_string())
                .or_default()
                .push((doc, freq));
            *self.collection_tf.entry(term.to_string()).or_insert(0) += u64::from(freq);
        }
        self.doc_lengths.push(tokens.len() as u32);
        self.total_length += tokens.len() as u64;
    }

    pub fn doc_length(&self, doc: usize) -> usize {
        self.doc_lengths[doc] as usize
    }

    pub fn total_length(&self) -> u64 {
        self.total_length
    }

    pub fn postings(&self, term: &str) -> Option<&[(u32, u32)]> {
        self.postings.get(term).map(Vec::as_slice)
    }

    pub fn collection_tf(&self, term: &str) -> u64 {
        self.collection_tf.get(term).copied().unwrap_or(0)
    }

    /// Background probability with a floor of `1 / (total_length + 1)` for
    /// unseen terms, so log scores stay finite.
    fn collection_prob(&self, term: &str) -> f64 {
        let cf = self.collection_tf(term);
        if cf == 0 {
            1.0 / (self.total_length as f64 + 1.0)
        } else {
            cf as f64 / self.total_length as f64
        }
    }

    fn tf_map(&self, term: &str) -> HashMap<u32, u32> {
        self.postings
            .get(term)
            .map(|p| p.iter().copied().collect())
            .unwrap_or_default()
    }
}

/// Inverted index over the (entity, attribute) documents of a KB.
#[derive(Debug, Clone, PartialEq)]
pub struct InvertedIndex {
    docs: Vec<DocId>,
    title: FieldIndex,
    content: FieldIndex,
    catchall: FieldIndex,
}

impl InvertedIndex {
    pub fn doc_count(&self) -> usize {
        self.docs.len()
    }

    pub fn docs(&self) -> &[DocId] {
        &self.docs
    }

    pub fn field(&self, field: Field) -> &FieldIndex {
        match field {
            Field::Title => &self.title,
            Field::Content => &self.content,
            Field::CatchAll => &self.catchall,
        }
    }
}

/// Build the index: one document per (entity, distinct attribute), fields
/// tokenized with the shared normalization, plus a catch-all field
/// concatenating title and content.
pub fn build_index(kb: &KnowledgeBase) -> Result<InvertedIndex> {
    if kb.entity_count() == 0 {
        return Err(Error::EmptyKb);
    }
    let mut docs: Vec<DocId> = Vec::new();
    let mut title = FieldIndex::default();
    let mut content = FieldIndex::default();
    let mut catchall = FieldIndex::default();
    for document in attr_documents(kb) {
        let doc = docs.len() as u32;
        let mut catchall_tokens = document.title_field.clone();
        catchall_tokens.extend(document.content_field.iter().cloned());
        title.add_doc(doc, &document.title_field);
        content.add_doc(doc, &document.content_field);
        catchall.add_doc(doc, &catchall_tokens);
        docs.push(document.doc_id);
    }
    Ok(InvertedIndex {
        docs,
        title,
        content,
        catchall,
    })
}

fn collect_ranked(
    index: &InvertedIndex,
    scores: Vec<(usize, f64)>,
    cutoff: usize,
) -> Vec<ScoredDoc> {
    let mut scored: Vec<(usize, f64)> = scores;
    scored.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    scored.truncate(cutoff);
    scored
        .into_iter()
        .map(|(doc, score)| ScoredDoc {
            doc: index.docs[doc].clone(),
            score,
        })
        .collect()
}

/// BM25 over the catch-all field, idf `ln((N - df + 0.5)/(df + 0.5) + 1)`.
/// Only documents containing at least one query term are returned.
pub fn bm25_rank(
    index: &InvertedIndex,
    query_terms: &[String],
    k1: f64,
    b: f64,
    cutoff: usize,
) -> Result<Vec<ScoredDoc>> {
    if k1.is_nan() || k1 < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "k1 must be >= 0, got {k1}"
        )));
    }
    if !(0.0..=1.0).contains(&b) {
        return Err(Error::InvalidParameter(format!(
            "b must be in [0, 1], got {b}"
        )));
    }
    let field = &index.catchall;
    let n = index.docs.len() as f64;
    let avgdl = field.total_length as f64 / n;
    let mut scores: BTreeMap<usize, f64> = BTreeMap::new();
    for term in query_terms {
        let Some(postings) = field.postings(term) else {
            continue;
        };
        let df = postings.len() as f64;
        let idf = ((n - df + 0.5) / (df + 0.5) + 1.0).ln();
        for &(doc, tf) in postings {
            let tf = f64::from(tf);
            let dl = field.doc_lengths[doc as usize] as f64;
            let norm = (tf * (k1 + 1.0)) / (tf + k1 * (1.0 - b + b * dl / avgdl));
            *scores.entry(doc as usize).or_insert(0.0) += idf * norm;
        }
    }
    Ok(collect_ranked(index, scores.into_iter().collect(), cutoff))
}

/// Dirichlet-smoothed query likelihood on the catch-all field. Every
/// document is scored; for an empty query the result is empty.
pub fn lm_rank(
    index: &InvertedIndex,
    query_terms: &[String],
    mu: f64,
    cutoff: usize,
) -> Result<Vec<ScoredDoc>> {
    if mu.is_nan() || mu <= 0.0 {
        return Err(Error::InvalidParameter(format!("mu must be > 0, got {mu}")));
    }
    if query_terms.is_empty() {
        return Ok(Vec::new());
    }
    let field = &index.catchall;
    let mut scores = vec![0.0f64; index.docs.len()];
    for term in query_terms {
        let p_c = field.collection_prob(term);
        let tf = field.tf_map(term);
        for (doc, score) in scores.iter_mut().enumerate() {
            let t = tf.get(&(doc as u32)).copied().unwrap_or(0) as f64;
            let dl = field.doc_lengths[doc] as f64;
            *score += ((t + mu * p_c) / (dl + mu)).ln();
        }
    }
    Ok(collect_ranked(
        index,
        scores.into_iter().enumerate().collect(),
        cutoff,
    ))
}

/// Two-field mixture of Dirichlet-smoothed language models: per term,
/// `p(t|d) = w_title * p(t|title) + w_content * p(t|content)`, each field
/// smoothed against its own collection model.
pub fn mlm_rank(
    index: &InvertedIndex,
    query_terms: &[String],
    w_title: f64,
    w_content: f64,
    mu: f64,
    cutoff: usize,
) -> Result<Vec<ScoredDoc>> {
    if mu.is_nan() || mu <= 0.0 {
        return Err(Error::InvalidParameter(format!("mu must be > 0, got {mu}")));
    }
    if !(0.0..=1.0).contains(&w_title)
        || !(0.0..=1.0).contains(&w_content)
        || (w_title + w_content - 1.0).abs() > 1e-9
    {
        return Err(Error::InvalidParameter(format!(
            "field weights must be in [0, 1] and sum to 1, got {w_title} + {w_content}"
        )));
    }
    if query_terms.is_empty() {
        return Ok(Vec::new());
    }
    let mut scores = vec![0.0f64; index.docs.len()];
    for term in query_terms {
        let p_c_title = index.title.collection_prob(term);
        let p_c_content = index.content.collection_prob(term);
        let tf_title = index.title.tf_map(term);
        let tf_content = index.content.tf_map(term);
        for (doc, score) in scores.iter_mut().enumerate() {
            let t_t = tf_title.get(&(doc as u32)).copied().unwrap_or(0) as f64;
            let t_c = tf_content.get(&(doc as u32)).copied().unwrap_or(0) as f64;
            let dl_t = index.title.doc_lengths[doc] as f64;
            let dl_c = index.content.doc_lengths[doc] as f64;
            let p_title = (t_t + mu * p_c_title) / (dl_t + mu);
            let p_content = (t_c + mu * p_c_content) / (dl_c + mu);
            *score += (w_title * p_title + w_content * p_content).ln();
        }
    }
    Ok(collect_ranked(
        index,
        scores.into_iter().enumerate().collect(),
        cutoff,
    ))
}

/// Collapse a document ranking to attribute names: keep documents of the
/// given entities, take the max score per attribute, order by score then
/// name.
pub fn aggregate_to_attributes(
    ranked: &[ScoredDoc],
    entities: &std::collections::BTreeSet<&str>,
    cutoff: usize,
) -> Vec<(String, f64)> {
    let mut best: BTreeMap<&str, f64> = BTreeMap::new();
    for sd in ranked {
        if !entities.contains(sd.doc.entity.as_str()) {
            continue;
        }
        best.entry(sd.doc.attribute.as_str())
            .and_modify(|s| {
                if sd.score > *s {
                    *s = sd.score;
                }
            })
            .or_insert(sd.score);
    }
    let mut out: Vec<(String, f64)> = best.into_iter().map(|(a, s)| (a.to_string(), s)).collect();
    crate::mrf::sort_ranking(&mut out);
    out.truncate(cutoff);
    out
}

const SNAPSHOT_MAGIC: &[u8; 8] = b"ATRIDX01";

/// Persist the index as a binary snapshot.
pub fn save_index(index: &InvertedIndex, path: &Path) -> Result<()> {
    let mut out =
        std::io::BufWriter::new(std::fs::File::create(path).map_err(|e| Error::io(path, e))?);
    let io_err = |e: std::io::Error| Error::io(path, e);
    out.write_all(SNAPSHOT_MAGIC).map_err(io_err)?;
    write_u32(&mut out, index.docs.len() as u32).map_err(io_err)?;
    for doc in &index.docs {
        write_str(&mut out, &doc.entity).map_err(io_err)?;
        write_str(&mut out, &doc.attribute).map_err(io_err)?;
    }
    for field in [&index.title, &index.content, &index.catchall] {
        write_field(&mut out, field).map_err(io_err)?;
    }
    out.flush().map_err(io_err)?;
    Ok(())
}

/// Load a snapshot written by [`save_index`].
pub fn load_index(path: &Path) -> Result<InvertedIndex> {
    let data = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    let mut cursor = std::io::Cursor::new(data.as_slice());
    let bad = |msg: &str| Error::Parse {
        path: path.display().to_string(),
        line: 0,
        msg: msg.to_string(),
    };
    let mut magic = [0u8; 8];
    cursor
        .read_exact(&mut magic)
        .map_err(|_| bad("truncated header"))?;
    if &magic != SNAPSHOT_MAGIC {
        return Err(bad("not an index snapshot (bad magic)"));
    }
    let doc_count = read_u32(&mut cursor).map_err(|_| bad("truncated doc count"))? as usize;
    let mut docs = Vec::with_capacity(doc_count);
    for _ in 0..doc_count {
        let entity = read_str(&mut cursor).map_err(|_| bad("truncated doc id"))?;
        let attribute = read_str(&mut cursor).map_err(|_| bad("truncated doc id"))?;
        docs.push(DocId { entity, attribute });
    }
    let title = read_field(&mut cursor, doc_count).map_err(|_| bad("truncated field"))?;
    let content = read_field(&mut cursor, doc_count).map_err(|_| bad("truncated field"))?;
    let catchall = read_field(&mut cursor, doc_count).map_err(|_| bad("truncated field"))?;
    Ok(InvertedIndex {
        docs,
        title,
        content,
        catchall,
    })
}

fn write_u32(out: &mut impl Write, v: u32) -> std::io::Result<()> {
    out.write_all(&v.to_le_bytes())
}

fn write_u64(out: &mut impl Write, v: u64) -> std::io::Result<()> {
    out.write_all(&v.to_le_bytes())
}

fn write_str(out: &mut impl Write, s: &str) -> std::io::Result<()> {
    write_u32(out, s.len() as u32)?;
    out.write_all(s.as_bytes())
}

fn write_field(out: &mut impl Write, field: &FieldIndex) -> std::io::Result<()> {
    for &len in &field.doc_lengths {
        write_u32(out, len)?;
    }
    write_u64(out, field.total_length)?;
    write_u32(out, field.postings.len() as u32)?;
    for (term, postings) in &field.postings {
        write_str(out, term)?;
        write_u32(out, postings.len() as u32)?;
        for &(doc, tf) in postings {
            write_u32(out, doc)?;
            write_u32(out, tf)?;
        }
    }
    Ok(())
}

fn read_u32(input: &mut impl Read) -> std::io::Result<u32> {
    let mut buf = [0u8; 4];
    input.read_exact(&mut buf)?;
    Ok(u32::from_le_bytes(buf))
}

fn read_u64(input: &mut impl Read) -> std::io::Result<u64> {
    let mut buf = [0u8; 8];
    input.read_exact(&mut buf)?;
    Ok(u64::from_le_bytes(buf))
}

fn read_str(input: &mut impl Read) -> std::io::Result<String> {
    let len = read_u32(input)? as usize;
    let mut buf = vec![0u8; len];
    input.read_exact(&mut buf)?;
    String::from_utf8(buf).map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidData, e))
}

fn read_field(input: &mut impl Read, doc_count: usize) -> std::io::Result<FieldIndex> {
    let mut field = FieldIndex::default();
    for _ in 0..doc_count {
        field.doc_lengths.push(read_u32(input)?);
    }
    field.total_length = read_u64(input)?;
    let term_count = read_u32(input)? as usize;
    for _ in 0..term_count {
        let term = read_str(input)?;
        let df = read_u32(input)? as usize;
        let mut postings = Vec::with_capacity(df);
        let mut cf = 0u64;
        for _ in 0..df {
            let doc = read_u32(input)?;
            let tf = read_u32(input)?;
            cf += u64::from(tf);
            postings.push((doc, tf));
        }
        field.collection_tf.insert(term.clone(), cf);
        field.postings.insert(term, postings);
    }
    Ok(field)
}

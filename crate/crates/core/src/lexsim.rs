//! Taxonomy-based word similarity.
//!
//! A small WordNet-style is-a graph: synsets carry lemmas, edges link child
//! synsets to parents (multiple parents allowed, no cycles). Similarity of
//! two words is `1 / (1 + len)` where `len` is the shortest path between any
//! two of their synsets, following is-a edges in either direction. Words
//! sharing a synset score 1; unknown lemmas and disconnected pairs are
//! `None`.
//!
//! File format: TSV records `SYN<TAB>id<TAB>lemma1,lemma2,..` and
//! `ISA<TAB>child<TAB>parent`. Full WordNet is imported offline into this
//! format; a bundled fixture serves the tests.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::io::BufRead;
use std::path::Path;

use crate::error::{Error, Result};
use crate::text;

/// Immutable is-a graph with a lemma index.
#[derive(Debug, Clone)]
pub struct Taxonomy {
    ids: Vec<String>,
    // child -> parents, as parsed (used for cycle validation)
    parents: Vec<Vec<usize>>,
    // undirected adjacency for path search
    neighbors: Vec<Vec<usize>>,
    lemma_index: BTreeMap<String, BTreeSet<usize>>,
}

impl Taxonomy {
    pub fn node_count(&self) -> usize {
        self.ids.len()
    }

    pub fn contains_lemma(&self, lemma: &str) -> bool {
        self.lemma_index.contains_key(&text::normalized_key(lemma))
    }

    /// Synset ids a lemma belongs to.
    pub fn synsets_of(&self, lemma: &str) -> Option<Vec<&str>> {
        self.lemma_index
            .get(&text::normalized_key(lemma))
            .map(|s| s.iter().map(|&i| self.ids[i].as_str()).collect())
    }

    /// Parent synsets of a synset id.
    pub fn parents_of(&self, id: &str) -> Option<Vec<&str>> {
        let idx = self.ids.iter().position(|i| i == id)?;
        Some(
            self.parents[idx]
                .iter()
                .map(|&p| self.ids[p].as_str())
                .collect(),
        )
    }

    /// `max over synset pairs of 1 / (1 + shortest_path)`, or `None` when
    /// either lemma is unknown or no path connects them.
    pub fn path_similarity(&self, w1: &str, w2: &str) -> Option<f64> {
        let s1 = self.lemma_index.get(&text::normalized_key(w1))?;
        let s2 = self.lemma_index.get(&text::normalized_key(w2))?;
        let len = self.shortest_distance(s1, s2)?;
        Some(1.0 / (1.0 + len as f64))
    }

    /// Bidirectional BFS between two synset sets. Expands the smaller
    /// frontier one level at a time; a recorded meeting value is final once
    /// it is at most the sum of the completed depths.
    fn shortest_distance(
        &self,
        sources: &BTreeSet<usize>,
        targets: &BTreeSet<usize>,
    ) -> Option<usize> {
        if sources.iter().any(|s| targets.contains(s)) {
            return Some(0);
        }
        let mut dist_a: HashMap<usize, usize> = sources.iter().map(|&s| (s, 0)).collect();
        let mut dist_b: HashMap<usize, usize> = targets.iter().map(|&t| (t, 0)).collect();
        let mut frontier_a: VecDeque<usize> = sources.iter().copied().collect();
        let mut frontier_b: VecDeque<usize> = targets.iter().copied().collect();
        let mut depth_a = 0usize;
        let mut depth_b = 0usize;
        let mut best: Option<usize> = None;

        loop {
            if let Some(b) = best {
                if b <= depth_a + depth_b {
                    return Some(b);
                }
            }
            if frontier_a.is_empty() && frontier_b.is_empty() {
                return best;
            }
            let expand_a = !frontier_a.is_empty()
                && (frontier_b.is_empty() || frontier_a.len() <= frontier_b.len());
            let (frontier, depth, dist_this, dist_other) = if expand_a {
                (&mut frontier_a, &mut depth_a, &mut dist_a, &dist_b)
            } else {
                (&mut frontier_b, &mut depth_b, &mut dist_b, &dist_a)
            };
            let mut next = VecDeque::new();
            let next_depth = *depth + 1;
            while let Some(node) = frontier.pop_front() {
                for &nb in &self.neighbors[node] {
                    if dist_this.contains_key(&nb) {
                        continue;
                    }
                    dist_this.insert(nb, next_depth);
                    if let Some(&other) = dist_other.get(&nb) {
                        let met = next_depth + other;
                        if best.is_none_or(|b| met < b) {
                            best = Some(met);
                        }
                    }
                    next.push_back(nb);
                }
            }
            *frontier = next;
            *depth = next_depth;
        }
    }
}

/// Load a taxonomy from TSV, verifying acyclicity and edge endpoints.
pub fn load_taxonomy(path: &Path) -> Result<Taxonomy> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let reader = std::io::BufReader::new(file);
    let mut ids: Vec<String> = Vec::new();
    let mut index: BTreeMap<String, usize> = BTreeMap::new();
    let mut lemmas_per_node: Vec<Vec<String>> = Vec::new();
    let mut edges: Vec<(String, String, usize)> = Vec::new();

    for (idx, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let lineno = idx + 1;
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        match fields.as_slice() {
            ["SYN", id, lemmas] => {
                if index.contains_key(*id) {
                    return Err(Error::parse(
                        path,
                        lineno,
                        format!("duplicate synset `{id}`"),
                    ));
                }
                index.insert(id.to_string(), ids.len());
                ids.push(id.to_string());
                lemmas_per_node.push(
                    lemmas
                        .split(',')
                        .map(str::trim)
                        .filter(|l| !l.is_empty())
                        .map(String::from)
                        .collect(),
                );
            }
            ["ISA", child, parent] => {
                edges.push((child.to_string(), parent.to_string(), lineno));
            }
            _ => {
                return Err(Error::parse(
                    path,
                    lineno,
                    "expected `SYN<TAB>id<TAB>lemmas` or `ISA<TAB>child<TAB>parent`",
                ));
            }
        }
    }

    let mut parents: Vec<Vec<usize>> = vec![Vec::new(); ids.len()];
    let mut neighbors: Vec<Vec<usize>> = vec![Vec::new(); ids.len()];
    for (child, parent, lineno) in &edges {
        let c = *index.get(child).ok_or_else(|| {
            Error::parse(
                path,
                *lineno,
                format!("edge references undefined synset `{child}`"),
            )
        })?;
        let p = *index.get(parent).ok_or_else(|| {
            Error::parse(
                path,
                *lineno,
                format!("edge references undefined synset `{parent}`"),
            )
        })?;
        if !parents[c].contains(&p) {
            parents[c].push(p);
            neighbors[c].push(p);
            neighbors[p].push(c);
        }
    }

    if let Some(cycle) = find_cycle(&parents) {
        let names: Vec<&str> = cycle.iter().map(|&i| ids[i].as_str()).collect();
        return Err(Error::TaxonomyCycle(names.join(" -> ")));
    }

    let mut lemma_index: BTreeMap<String, BTreeSet<usize>> = BTreeMap::new();
    for (node, lemmas) in lemmas_per_node.iter().enumerate() {
        for lemma in lemmas {
            let key = text::normalized_key(lemma);
            if !key.is_empty() {
                lemma_index.entry(key).or_default().insert(node);
            }
        }
    }

    Ok(Taxonomy {
        ids,
        parents,
        neighbors,
        lemma_index,
    })
}

/// Depth-first search over the directed child->parent edges; returns one
/// cycle (closed walk, first node repeated) if any exists.
fn find_cycle(parents: &[Vec<usize>]) -> Option<Vec<usize>> {
    #[derive(Clone, Copy, PartialEq)]
    enum Color {
        White,
        Gray,
        Black,
    }
    let mut color = vec![Color::White; parents.len()];
    let mut stack: Vec<usize> = Vec::new();

    for start in 0..parents.len() {
        if color[start] != Color::White {
            continue;
        }
        // iterative DFS keeping (node, next edge index)
        let mut work: Vec<(usize, usize)> = vec![(start, 0)];
        color[start] = Color::Gray;
        stack.push(start);
        while let Some(&mut (node, ref mut edge)) = work.last_mut() {
            if *edge < parents[node].len() {
                let next = parents[node][*edge];
                *edge += 1;
                match color[next] {
                    Color::Gray => {
                        let pos = stack.iter().position(|&n| n == next).unwrap();
                        let mut cycle: Vec<usize> = stack[pos..].to_vec();
                        cycle.push(next);
                        return Some(cycle);
                    }
                    Color::White => {
                        color[next] = Color::Gray;
                        stack.push(next);
                        work.push((next, 0));
                    }
                    Color::Black => {}
                }
            } else {
                color[node] = Color::Black;
                stack.pop();
                work.pop();
            }
        }
    }
    None
}

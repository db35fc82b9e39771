//! Word vector store.
//!
//! Vectors are L2-normalized on load. On unit vectors the Euclidean distance
//! lies in [0, 2], so the distance reported by [`WordVectorStore::word_distance`]
//! is halved to fit [0, 1]; `1 - distance` is then a well-defined log argument
//! for the query/attribute feature function. Out-of-vocabulary lookups return
//! `None` so callers can skip the word instead of treating it as zero
//! similarity.
//!
//! File format: optional header line `count dim`, then one `token v1 .. vd`
//! row per word, space-separated. Files ending in `.gz` are decompressed.

use std::collections::HashMap;
use std::io::BufRead;
use std::path::Path;

use crate::error::{Error, Result};

/// Immutable store of unit-length word vectors.
#[derive(Debug, Clone)]
pub struct WordVectorStore {
    dimension: usize,
    vectors: HashMap<String, Vec<f64>>,
    duplicates_replaced: usize,
}

impl WordVectorStore {
    /// Build a store from `(token, vector)` pairs, normalizing each vector.
    /// Duplicate tokens: last wins.
    pub fn from_vectors<I, S>(dimension: usize, rows: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, Vec<f64>)>,
        S: Into<String>,
    {
        let mut store = WordVectorStore {
            dimension,
            vectors: HashMap::new(),
            duplicates_replaced: 0,
        };
        for (token, vector) in rows {
            store.insert(token.into(), vector)?;
        }
        Ok(store)
    }

    fn insert(&mut self, token: String, mut vector: Vec<f64>) -> Result<()> {
        if vector.len() != self.dimension {
            return Err(Error::InvalidParameter(format!(
                "vector for `{token}` has dimension {}, store has {}",
                vector.len(),
                self.dimension
            )));
        }
        let norm = vector.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "vector for `{token}` cannot be normalized (norm {norm})"
            )));
        }
        for x in &mut vector {
            *x /= norm;
        }
        if self.vectors.insert(token, vector).is_some() {
            self.duplicates_replaced += 1;
        }
        Ok(())
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    /// How many tokens were overwritten by later rows during load.
    pub fn duplicates_replaced(&self) -> usize {
        self.duplicates_replaced
    }

    pub fn contains(&self, token: &str) -> bool {
        self.vectors.contains_key(token)
    }

    pub fn vector(&self, token: &str) -> Option<&[f64]> {
        self.vectors.get(token).map(|v| v.as_slice())
    }

    /// Normalized Euclidean distance in [0, 1], `None` if either token is
    /// out of vocabulary.
    pub fn word_distance(&self, w1: &str, w2: &str) -> Option<f64> {
        let v1 = self.vectors.get(w1)?;
        let v2 = self.vectors.get(w2)?;
        let dist = v1
            .iter()
            .zip(v2.iter())
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        Some(dist / 2.0)
    }

    /// Cosine similarity in [-1, 1] (dot product of the stored unit
    /// vectors), `None` if either token is out of vocabulary.
    pub fn cosine_similarity(&self, w1: &str, w2: &str) -> Option<f64> {
        let v1 = self.vectors.get(w1)?;
        let v2 = self.vectors.get(w2)?;
        Some(v1.iter().zip(v2.iter()).map(|(a, b)| a * b).sum())
    }
}

/// Load word vectors from a text file (`.gz` accepted by extension).
pub fn load_vectors(path: &Path) -> Result<WordVectorStore> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let reader: Box<dyn BufRead> = if path.extension().is_some_and(|e| e == "gz") {
        Box::new(std::io::BufReader::new(flate2::read::GzDecoder::new(file)))
    } else {
        Box::new(std::io::BufReader::new(file))
    };
    let mut dimension: Option<usize> = None;
    let mut store: Option<WordVectorStore> = None;
    for (idx, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let lineno = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        // Optional header: exactly two fields, both unsigned integers.
        if store.is_none() && fields.len() == 2 {
            if let (Ok(_count), Ok(dim)) = (fields[0].parse::<usize>(), fields[1].parse::<usize>())
            {
                if dim == 0 {
                    return Err(Error::parse(path, lineno, "header dimension is zero"));
                }
                dimension = Some(dim);
                store = Some(WordVectorStore {
                    dimension: dim,
                    vectors: HashMap::new(),
                    duplicates_replaced: 0,
                });
                continue;
            }
        }
        if fields.len() < 2 {
            return Err(Error::parse(path, lineno, "expected `token v1 .. vd`"));
        }
        let token = fields[0];
        let mut vector = Vec::with_capacity(fields.len() - 1);
        for f in &fields[1..] {
            let x: f64 = f
                .parse()
                .map_err(|_| Error::parse(path, lineno, format!("non-numeric component `{f}`")))?;
            if !x.is_finite() {
                return Err(Error::parse(
                    path,
                    lineno,
                    format!("non-finite component `{f}`"),
                ));
            }
            vector.push(x);
        }
        let dim = *dimension.get_or_insert(vector.len());
        if vector.len() != dim {
            return Err(Error::parse(
                path,
                lineno,
                format!("expected {dim} components, found {}", vector.len()),
            ));
        }
        let store = store.get_or_insert_with(|| WordVectorStore {
            dimension: dim,
            vectors: HashMap::new(),
            duplicates_replaced: 0,
        });
        store
            .insert(token.to_string(), vector)
            .map_err(|e| Error::parse(path, lineno, e.to_string()))?;
    }
    store.ok_or(Error::Parse {
        path: path.display().to_string(),
        line: 0,
        msg: "no vectors in file".to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::io::Write;

    fn fixture() -> WordVectorStore {
        WordVectorStore::from_vectors(
            3,
            vec![
                ("x", vec![1.0, 0.0, 0.0]),
                ("y", vec![0.0, 1.0, 0.0]),
                ("p", vec![3.0, 4.0, 0.0]),
                ("q", vec![0.8, 0.6, 0.0]),
            ],
        )
        .unwrap()
    }

    #[test]
    fn load_with_header() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "2 3").unwrap();
        writeln!(f, "x 1 0 0").unwrap();
        writeln!(f, "y 0 1 0").unwrap();
        let store = load_vectors(f.path()).unwrap();
        assert_eq!(store.dimension(), 3);
        assert_eq!(store.len(), 2);
    }

    #[test]
    fn wrong_width_names_line() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "x 1 0 0").unwrap();
        writeln!(f, "y 0 1").unwrap();
        match load_vectors(f.path()) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn non_numeric_component_is_an_error() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "x 1 banana 0").unwrap();
        assert!(matches!(load_vectors(f.path()), Err(Error::Parse { .. })));
    }

    #[test]
    fn duplicates_last_wins_with_count() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "x 1 0 0").unwrap();
        writeln!(f, "x 0 1 0").unwrap();
        let store = load_vectors(f.path()).unwrap();
        assert_eq!(store.duplicates_replaced(), 1);
        assert_abs_diff_eq!(store.vector("x").unwrap()[1], 1.0);
    }

    #[test]
    fn vectors_are_normalized_on_load() {
        let store = fixture();
        // 3-4-5 triangle
        let v = store.vector("p").unwrap();
        assert_abs_diff_eq!(v[0], 0.6, epsilon = 1e-12);
        assert_abs_diff_eq!(v[1], 0.8, epsilon = 1e-12);
        for tok in ["x", "y", "p", "q"] {
            let norm: f64 = store.vector(tok).unwrap().iter().map(|x| x * x).sum();
            assert_abs_diff_eq!(norm, 1.0, epsilon = 1e-6);
        }
    }

    #[test]
    fn gz_files_are_decompressed() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("vecs.txt.gz");
        let f = std::fs::File::create(&path).unwrap();
        let mut gz = flate2::write::GzEncoder::new(f, flate2::Compression::default());
        writeln!(gz, "x 1 0 0").unwrap();
        gz.finish().unwrap();
        let store = load_vectors(&path).unwrap();
        assert!(store.contains("x"));
    }

    #[test]
    fn distance_fixtures() {
        let store = fixture();
        assert_abs_diff_eq!(store.word_distance("x", "x").unwrap(), 0.0);
        // orthogonal unit vectors
        assert_abs_diff_eq!(
            store.word_distance("x", "y").unwrap(),
            std::f64::consts::SQRT_2 / 2.0,
            epsilon = 1e-12
        );
        assert_eq!(store.word_distance("x", "zebra"), None);
    }

    #[test]
    fn cosine_fixtures() {
        let store = fixture();
        assert_abs_diff_eq!(store.cosine_similarity("x", "x").unwrap(), 1.0);
        assert_abs_diff_eq!(store.cosine_similarity("x", "y").unwrap(), 0.0);
        // (0.6, 0.8, 0) . (0.8, 0.6, 0)
        assert_abs_diff_eq!(
            store.cosine_similarity("p", "q").unwrap(),
            0.96,
            epsilon = 1e-12
        );
        assert_eq!(store.cosine_similarity("zebra", "x"), None);
    }

    #[test]
    fn zero_vector_is_rejected() {
        let res = WordVectorStore::from_vectors(2, vec![("z", vec![0.0, 0.0])]);
        assert!(res.is_err());
    }
}

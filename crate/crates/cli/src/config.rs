//! Run configuration: a TOML key/value file plus flag overrides (flags
//! win). Defaults follow the standard setup: BM25 k1=1.2 b=0.8, Dirichlet
//! mu=2000, MLM weights 0.2/0.8, lambda=(0.6,0.2,0.2), mu1=mu2=0.5,
//! 5 folds, 3 restarts, cutoff 5.

use std::path::{Path, PathBuf};

use anyhow::Context;
use clap::Args;
use serde::Deserialize;

use attrank::mrf::MrfParams;

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub kb: Option<PathBuf>,
    pub vectors: Option<PathBuf>,
    pub taxonomy: Option<PathBuf>,
    pub annotations: Option<PathBuf>,
    pub qrels: Option<PathBuf>,
    pub stoplist: Option<PathBuf>,
    pub k: Option<usize>,
    pub k1: Option<f64>,
    pub b: Option<f64>,
    pub mu: Option<f64>,
    pub w_title: Option<f64>,
    pub w_content: Option<f64>,
    pub lambda1: Option<f64>,
    pub lambda2: Option<f64>,
    pub lambda3: Option<f64>,
    pub mu1: Option<f64>,
    pub mu2: Option<f64>,
    pub epsilon: Option<f64>,
    pub folds: Option<usize>,
    pub restarts: Option<usize>,
    pub seed: Option<u64>,
}

/// Input-path flags shared by the subcommands; every flag overrides the
/// config-file value of the same name.
#[derive(Debug, Clone, Default, Args)]
pub struct PathArgs {
    /// Knowledge base TSV (`entity<TAB>attribute<TAB>value`)
    #[arg(long, value_name = "PATH")]
    pub kb: Option<PathBuf>,
    /// Word vectors (`token v1 .. vd`, optional `count dim` header, .gz ok)
    #[arg(long, value_name = "PATH")]
    pub vectors: Option<PathBuf>,
    /// Taxonomy TSV (`SYN`/`ISA` records)
    #[arg(long, value_name = "PATH")]
    pub taxonomy: Option<PathBuf>,
    /// Query annotations TSV
    #[arg(long, value_name = "PATH")]
    pub annotations: Option<PathBuf>,
    /// Graded judgments (`qid 0 attribute grade`)
    #[arg(long, value_name = "PATH")]
    pub qrels: Option<PathBuf>,
    /// Stoplist (one token per line); stopwords are kept unless this is set
    #[arg(long, value_name = "PATH")]
    pub stoplist: Option<PathBuf>,
}

/// Model parameters; names follow the usual symbols.
#[derive(Debug, Clone, Default, Args)]
pub struct ParamArgs {
    /// Ranking cutoff
    #[arg(long, value_name = "N")]
    pub k: Option<usize>,
    /// BM25 tf saturation
    #[arg(long, value_name = "X")]
    pub k1: Option<f64>,
    /// BM25 length normalization
    #[arg(long, value_name = "X")]
    pub b: Option<f64>,
    /// Dirichlet smoothing for LM / MLM
    #[arg(long, value_name = "X")]
    pub mu: Option<f64>,
    /// MLM title-field weight
    #[arg(long, value_name = "X")]
    pub w_title: Option<f64>,
    /// MLM content-field weight
    #[arg(long, value_name = "X")]
    pub w_content: Option<f64>,
    /// Weight of the query-term/attribute cliques
    #[arg(long, value_name = "X")]
    pub lambda1: Option<f64>,
    /// Weight of the attribute/entity clique
    #[arg(long, value_name = "X")]
    pub lambda2: Option<f64>,
    /// Weight of the query-term/entity cliques
    #[arg(long, value_name = "X")]
    pub lambda3: Option<f64>,
    /// Entity-vs-global smoothing of the attribute frequency feature
    #[arg(long, value_name = "X")]
    pub mu1: Option<f64>,
    /// Entity-vs-global smoothing of the term match feature
    #[arg(long, value_name = "X")]
    pub mu2: Option<f64>,
    /// Log-argument clamp
    #[arg(long, value_name = "X")]
    pub epsilon: Option<f64>,
    /// Cross-validation folds
    #[arg(long, value_name = "N")]
    pub folds: Option<usize>,
    /// Coordinate-ascent random restarts
    #[arg(long, value_name = "N")]
    pub restarts: Option<usize>,
    /// Random seed
    #[arg(long, value_name = "N")]
    pub seed: Option<u64>,
}

/// Fully resolved configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub kb: Option<PathBuf>,
    pub vectors: Option<PathBuf>,
    pub taxonomy: Option<PathBuf>,
    pub annotations: Option<PathBuf>,
    pub qrels: Option<PathBuf>,
    pub stoplist: Option<PathBuf>,
    pub k: usize,
    pub k1: f64,
    pub b: f64,
    pub mu: f64,
    pub w_title: f64,
    pub w_content: f64,
    pub mrf: MrfParams,
    pub folds: usize,
    pub restarts: usize,
    pub seed: u64,
}

impl RunConfig {
    pub fn resolve(
        config_path: Option<&Path>,
        paths: &PathArgs,
        params: &ParamArgs,
    ) -> anyhow::Result<RunConfig> {
        let file: FileConfig = match config_path {
            Some(path) => {
                let content = std::fs::read_to_string(path)
                    .with_context(|| format!("reading config {}", path.display()))?;
                toml::from_str(&content)
                    .with_context(|| format!("parsing config {}", path.display()))?
            }
            None => FileConfig::default(),
        };
        let mrf = MrfParams {
            lambda1: params.lambda1.or(file.lambda1).unwrap_or(0.6),
            lambda2: params.lambda2.or(file.lambda2).unwrap_or(0.2),
            lambda3: params.lambda3.or(file.lambda3).unwrap_or(0.2),
            mu1: params.mu1.or(file.mu1).unwrap_or(0.5),
            mu2: params.mu2.or(file.mu2).unwrap_or(0.5),
            epsilon: params.epsilon.or(file.epsilon).unwrap_or(1e-9),
        };
        let config = RunConfig {
            kb: paths.kb.clone().or(file.kb),
            vectors: paths.vectors.clone().or(file.vectors),
            taxonomy: paths.taxonomy.clone().or(file.taxonomy),
            annotations: paths.annotations.clone().or(file.annotations),
            qrels: paths.qrels.clone().or(file.qrels),
            stoplist: paths.stoplist.clone().or(file.stoplist),
            k: params.k.or(file.k).unwrap_or(5),
            k1: params.k1.or(file.k1).unwrap_or(1.2),
            b: params.b.or(file.b).unwrap_or(0.8),
            mu: params.mu.or(file.mu).unwrap_or(2000.0),
            w_title: params.w_title.or(file.w_title).unwrap_or(0.2),
            w_content: params.w_content.or(file.w_content).unwrap_or(0.8),
            mrf,
            folds: params.folds.or(file.folds).unwrap_or(5),
            restarts: params.restarts.or(file.restarts).unwrap_or(3),
            seed: params.seed.or(file.seed).unwrap_or(42),
        };
        if config.k == 0 {
            anyhow::bail!("--k must be positive");
        }
        Ok(config)
    }

    pub fn require(&self, field: &str) -> anyhow::Result<&Path> {
        let value = match field {
            "kb" => &self.kb,
            "vectors" => &self.vectors,
            "taxonomy" => &self.taxonomy,
            "annotations" => &self.annotations,
            "qrels" => &self.qrels,
            _ => unreachable!("unknown field {field}"),
        };
        value.as_deref().ok_or_else(|| {
            anyhow::anyhow!("missing input: set `{field}` in the config file or pass --{field}")
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_match_the_standard_setup() {
        let config = RunConfig::resolve(None, &PathArgs::default(), &ParamArgs::default()).unwrap();
        assert_eq!(config.k, 5);
        assert_eq!(config.k1, 1.2);
        assert_eq!(config.b, 0.8);
        assert_eq!(config.mu, 2000.0);
        assert_eq!((config.w_title, config.w_content), (0.2, 0.8));
        assert_eq!(
            (config.mrf.lambda1, config.mrf.lambda2, config.mrf.lambda3),
            (0.6, 0.2, 0.2)
        );
        assert_eq!((config.mrf.mu1, config.mrf.mu2), (0.5, 0.5));
        assert_eq!((config.folds, config.restarts), (5, 3));
    }

    #[test]
    fn flags_override_file_values() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("config.toml");
        std::fs::write(&path, "k1 = 0.9\nseed = 1\nkb = \"from_file.tsv\"\n").unwrap();
        let params = ParamArgs {
            k1: Some(2.0),
            ..ParamArgs::default()
        };
        let paths = PathArgs {
            kb: Some(PathBuf::from("from_flag.tsv")),
            ..PathArgs::default()
        };
        let config = RunConfig::resolve(Some(&path), &paths, &params).unwrap();
        assert_eq!(config.k1, 2.0);
        assert_eq!(config.seed, 1);
        assert_eq!(config.kb.as_deref(), Some(Path::new("from_flag.tsv")));
    }

    #[test]
    fn unknown_config_keys_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("config.toml");
        std::fs::write(&path, "nope = 1\n").unwrap();
        assert!(
            RunConfig::resolve(Some(&path), &PathArgs::default(), &ParamArgs::default()).is_err()
        );
    }
}

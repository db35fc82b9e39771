use std::path::Path;

/// Errors produced by loaders, rankers, and the evaluation toolchain.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A structured text file (KB, vectors, taxonomy, annotations, qrels,
    /// run, labels) violated its format at a specific line.
    #[error("{path}:{line}: {msg}")]
    Parse {
        path: String,
        line: usize,
        msg: String,
    },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("unknown entity `{0}`")]
    UnknownEntity(String),

    #[error("knowledge base is empty")]
    EmptyKb,

    #[error("query `{0}` has no linked entities")]
    NoLinkedEntities(String),

    #[error("taxonomy cycle: {0}")]
    TaxonomyCycle(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("training failed: {0}")]
    Training(String),

    #[error("evaluation failed: {0}")]
    Evaluation(String),
}

impl Error {
    pub(crate) fn parse(path: &Path, line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            path: path.display().to_string(),
            line,
            msg: msg.into(),
        }
    }

    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        Error::Io {
            path: path.display().to_string(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

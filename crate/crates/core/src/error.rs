use std::path::PathBuf;

/// Errors produced anywhere in the library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{file}:{line}: {message}")]
    Parse {
        file: PathBuf,
        line: usize,
        message: String,
    },
    #[error("missing file {0}")]
    MissingFile(PathBuf),
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid graph: {0}")]
    InvalidGraph(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("non-finite value in {0}")]
    NonFinite(String),
    #[error("undefined homophily for class {0}: no node of that class has a neighbor")]
    UndefinedHomophily(usize),
    #[error(
        "candidate set too small: need {needed} candidates besides the query, have {available}"
    )]
    CandidateSetTooSmall { needed: usize, available: usize },
    #[error("degenerate embedding: zero-norm vector")]
    DegenerateEmbedding,
    #[error("epoch {epoch} outside schedule range [0, {total}]")]
    EpochOutOfRange { epoch: usize, total: usize },
    #[error("support mismatch: {0}")]
    SupportMismatch(String),
    #[error("empty node set")]
    EmptyNodeSet,
    #[error("no class has evaluation instances")]
    NoEvaluableClass,
    #[error("training diverged at epoch {epoch}: {reason}")]
    Divergence { epoch: usize, reason: String },
    #[error("loss closure is not deterministic: {first} != {second}")]
    NonDeterministicClosure { first: f64, second: f64 },
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("unsupported weight distribution `{0}`")]
    UnsupportedDistribution(String),

    #[error("n = {n} exceeds the configured limit of {limit} qubits")]
    TooLarge { n: usize, limit: usize },

    #[error("dimension mismatch: state has {state} qubits, table has {table}")]
    DimensionMismatch { state: usize, table: usize },

    #[error("schema error in {path}: {msg}")]
    Schema { path: PathBuf, msg: String },

    #[error("checksum mismatch in {path}: expected {expected}, computed {computed}")]
    Checksum {
        path: PathBuf,
        expected: String,
        computed: String,
    },

    #[error("non-finite objective value at gamma={gamma}, t={t}, beta={beta}")]
    NonFiniteObjective { gamma: f64, t: f64, beta: f64 },

    #[error("target {target} not bracketed for n = {n} up to p = {p_max}")]
    Unbracketed { n: usize, target: f64, p_max: usize },

    #[error("no bracket: {0}")]
    NoBracket(String),

    #[error("fit failed: {0}")]
    Fit(String),

    #[error("config hash mismatch: {0} vs {1}")]
    HashMismatch(String, String),

    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            context: context.into(),
            source,
        }
    }

    pub(crate) fn schema(path: impl Into<PathBuf>, msg: impl Into<String>) -> Self {
        Error::Schema {
            path: path.into(),
            msg: msg.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

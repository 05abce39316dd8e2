use std::path::PathBuf;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("epsilon = {epsilon} is not an integer multiple q > 1 of delta = {delta}; negotiator `{negotiator}` needs grid-aligned steps")]
    GridRatio {
        epsilon: f64,
        delta: f64,
        negotiator: String,
    },

    #[error("config schema violation: {0}")]
    Schema(String),

    #[error("referenced file does not exist: {}", .0.display())]
    MissingFile(PathBuf),

    #[error("negotiator `{negotiator}` cannot run on this market: {reason}")]
    Incompatible { negotiator: String, reason: String },

    #[error("enumeration bound exceeded: {num_k}x{num_l} market (limit {limit}x{limit})")]
    TooLarge {
        num_k: usize,
        num_l: usize,
        limit: usize,
    },

    #[error("state is not pre-stable")]
    NotPreStable,

    #[error("i/o error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error on {}: {source}", path.display())]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// CLI exit status: 2 for I/O failures, 1 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io { .. } | Error::Csv { .. } => 2,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

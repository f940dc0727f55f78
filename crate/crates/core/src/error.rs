use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error(
        "exhaustive search refused: N^K = {n_beams}^{n_users} = {candidates} exceeds the \
         enumeration budget of {budget}"
    )]
    BudgetExceeded {
        n_beams: usize,
        n_users: usize,
        candidates: u128,
        budget: u128,
    },

    #[error("dataset is empty")]
    EmptyDataset,

    #[error("{path}: line {line}: {kind}")]
    Parse {
        path: PathBuf,
        line: usize,
        kind: ParseErrorKind,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// Distinct ways a dataset or results file can fail to parse.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseErrorKind {
    #[error("malformed header: {0}")]
    MalformedHeader(String),
    #[error("malformed record: {0}")]
    MalformedRecord(String),
    #[error("header declares {expected} records but {found} were found")]
    RecordCount { expected: usize, found: usize },
    #[error("non-finite value `{0}`")]
    NonFinite(String),
    #[error("{0} out of range")]
    OutOfRange(String),
    #[error("label mask {mask} is wider than {n_beams} bits")]
    MaskTooWide { mask: String, n_beams: usize },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("shape mismatch: expected {expected_rows}x{expected_cols}, found {rows}x{cols}")]
    ShapeMismatch {
        expected_rows: usize,
        expected_cols: usize,
        rows: usize,
        cols: usize,
    },

    #[error("invalid tolerance: {0}")]
    InvalidTolerance(String),

    #[error("invalid party signature: {0}")]
    InvalidSignature(String),

    #[error("state {state}: {message}")]
    InvalidState { state: usize, message: String },

    #[error("signature mismatch: {left:?} vs {right:?}")]
    SignatureMismatch { left: Vec<usize>, right: Vec<usize> },

    #[error("party index {party} out of range for {parties} parties")]
    PartyOutOfRange { party: usize, parties: usize },

    #[error("state index {index} out of range for a set of {len} states")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("pair ({0}, {0}) is not a pair of distinct states")]
    SamePair(usize),

    #[error("state {0} is dense; use the general (dense) path for this set")]
    DenseMember(usize),

    #[error("set is not mutually orthogonal; offending pairs: {pairs:?}")]
    NotOrthogonal { pairs: Vec<(usize, usize)> },

    #[error(
        "set spans the whole space ({states} states in dimension {dim}); its complement is empty"
    )]
    CompleteSet { states: usize, dim: usize },

    #[error("invalid seed list: {0}")]
    InvalidSeed(String),

    #[error("{what} out of range: {message}")]
    OutOfRange { what: &'static str, message: String },

    #[error("parse error in field `{field}`: {message}")]
    Parse { field: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn parse(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            field: field.into(),
            message: message.into(),
        }
    }
}

use thiserror::Error;

use crate::hgt::HgtFailure;

/// Errors produced anywhere in the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("newick syntax error at offset {offset}: {message}")]
    Newick { offset: usize, message: String },

    #[error("duplicate leaf name {0:?}")]
    DuplicateLeaf(String),

    #[error("leaf sets differ: {0}")]
    LeafSetMismatch(String),

    #[error("unknown leaf {0}")]
    UnknownLeaf(String),

    #[error("sequence length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),

    #[error("sequences must have length at least 1")]
    EmptySequence,

    #[error("infinite distance passed to {0}")]
    InfiniteDistance(&'static str),

    #[error("triplet is not positive")]
    NonPositiveTriplet,

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Hgt(#[from] HgtFailure),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}

use thiserror::Error;

use crate::equation::IndexPair;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("truncation exhausted: requested order {requested} but only {available} is trusted")]
    TruncationExhausted { requested: usize, available: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error(
        "condition A3 violated at (j={}, alpha={}): x-valuation {valuation} < alpha",
        .pair.j, .pair.alpha
    )]
    A3Violation { pair: IndexPair, valuation: usize },

    #[error("resonance: L({k},{l}) = 0")]
    Resonance { k: usize, l: usize },

    #[error("line {line}, field `{field}`: {message}")]
    Parse {
        line: usize,
        field: String,
        message: String,
    },

    #[error("invalid equation, field `{field}`: {message}")]
    InvalidSpec { field: String, message: String },

    #[error("hypothesis {clause} violated: {message}")]
    Hypothesis { clause: String, message: String },

    #[error("invariant breach: {0}")]
    Invariant(String),
}

impl Error {
    pub(crate) fn invalid(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::InvalidSpec {
            field: field.into(),
            message: message.into(),
        }
    }

    pub(crate) fn hypothesis(clause: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Hypothesis {
            clause: clause.into(),
            message: message.into(),
        }
    }
}

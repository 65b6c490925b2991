use thiserror::Error;

use crate::model::BatteryKind;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A parameter lies outside the domain where the operation is defined.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("{operation} is not supported for the {kind:?} battery")]
    UnsupportedModel {
        operation: &'static str,
        kind: BatteryKind,
    },

    /// A state or record broke one of its numerical invariants
    /// (trace, hermiticity, positivity, monotone time axis, ...).
    #[error("invariant violation: {0}")]
    InvariantViolation(String),

    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn invariant(msg: impl Into<String>) -> Self {
        Error::InvariantViolation(msg.into())
    }
}

use thiserror::Error;

use crate::lie::Group;

/// Errors raised by the group kernel, the retractions and the steppers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("group mismatch: {left:?} vs {right:?}")]
    GroupMismatch { left: Group, right: Group },

    #[error("matrix is not an element of {group:?} (residual {residual:e})")]
    NotInGroup { group: Group, residual: f64 },

    #[error("argument outside the domain of {what}: {detail}")]
    OutOfDomain { what: &'static str, detail: String },

    #[error("{what} is not available on {group:?}")]
    UnsupportedGroup { what: &'static str, group: Group },

    #[error("singular matrix in {0}")]
    Singular(&'static str),

    #[error("Newton iteration did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("reference solutions disagree by {discrepancy:e} (limit {limit:e})")]
    ReferenceUnconverged { discrepancy: f64, limit: f64 },

    #[error("invalid Butcher tableau: {0}")]
    InvalidTableau(String),

    #[error("invalid configuration: {}", .0.join("; "))]
    InvalidConfig(Vec<String>),

    #[error("model error: {0}")]
    Model(String),
}

pub type Result<T> = std::result::Result<T, Error>;

use std::fmt;

use crate::monitor::Monitor;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Vector or matrix dimensions do not match the block structure.
    #[error("structural error: {0}")]
    Structure(String),

    /// A parameter is outside its admissible range.
    #[error("parameter error: {0}")]
    Parameter(String),

    /// Problem data or constants are degenerate for the requested operation.
    #[error("configuration error: {0}")]
    Config(String),

    /// A lemma monitor failed during a run.
    #[error("invariant violation at iteration {iteration}: {monitor} ({detail})")]
    InvariantViolation {
        iteration: usize,
        monitor: Monitor,
        detail: ViolationDetail,
    },

    /// The inner subproblem solver could not produce a sufficient-descent point.
    #[error("descent oracle failure at outer iteration {iteration}: {reason}")]
    OracleFailure { iteration: usize, reason: String },

    /// Two trajectories that must coincide drifted apart.
    #[error("equivalence violation: deviation {deviation:e} exceeds {threshold:e} at iteration {iteration}")]
    EquivalenceViolation {
        iteration: usize,
        deviation: f64,
        threshold: f64,
    },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// The two sides of a failed `lhs <= rhs` check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ViolationDetail {
    pub lhs: f64,
    pub rhs: f64,
}

impl fmt::Display for ViolationDetail {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:e} > {:e}", self.lhs, self.rhs)
    }
}

pub(crate) fn structure_err(msg: impl Into<String>) -> Error {
    Error::Structure(msg.into())
}

pub(crate) fn param_err(msg: impl Into<String>) -> Error {
    Error::Parameter(msg.into())
}

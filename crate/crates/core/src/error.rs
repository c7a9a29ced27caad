use thiserror::Error;

/// Errors raised by the solvers, builders and configuration layer.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("potential check failed: {0}")]
    PotentialCheck(String),

    #[error("connection endpoints must differ (got {0} -> {0})")]
    SameWell(usize),

    #[error("well index {index} out of range (potential has {count} wells)")]
    WellIndex { index: usize, count: usize },

    #[error("{solver} did not converge after {iterations} iterations (last gradient norm {gradient_norm:.3e})")]
    NoConvergence {
        solver: &'static str,
        iterations: usize,
        gradient_norm: f64,
    },

    #[error("boundary transitions {first} and {second} overlap at eps = {eps}")]
    OverlappingTransitions { first: usize, second: usize, eps: f64 },

    #[error("arc list does not partition the boundary: {0}")]
    BadArcs(String),

    #[error("eps = {eps} is below the resolvability floor 4h = {floor}")]
    Unresolved { eps: f64, floor: f64 },

    #[error("mass target is not attainable: {0}")]
    UnattainableMass(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("field snapshot: {0}")]
    Snapshot(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}

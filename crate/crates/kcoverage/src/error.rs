//! Library-wide error type.

/// Errors surfaced by geometry, partition, agent and simulator operations.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// A region has zero mass, so its centroid is undefined.
    #[error("degenerate region: zero mass")]
    DegenerateRegion,

    /// The dual-guaranteed cell is empty or has zero mass; `bnd` is undefined.
    #[error("degenerate dual-guaranteed cell")]
    DegenerateDualCell,

    /// The guaranteed cell vanished: stored information is too stale to plan
    /// any safe motion and the caller must perform a position update.
    #[error("uncertainty exhausted: guaranteed cell is empty")]
    UncertaintyExhausted,

    /// An agent id outside `0..n` was requested.
    #[error("unknown agent id {0}")]
    UnknownAgent(usize),

    /// An operation requiring at least one input point received none.
    #[error("empty point set")]
    EmptyPointSet,

    /// A configuration value or combination is invalid.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// A per-step runtime check failed (only raised when assertions are on).
    #[error("invariant violated at step {step}: {what}")]
    InvariantViolation { step: usize, what: String },
}

pub type Result<T> = std::result::Result<T, Error>;

use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// Invalid configuration or parameter set. Maps to CLI exit code 2.
    #[error("config error: {0}")]
    Config(String),

    /// A numeric input that must be finite was NaN or infinite.
    #[error("non-finite input: {0}")]
    NonFinite(&'static str),

    /// Extended state observer left its stability envelope.
    #[error(
        "observer divergence in channel `{channel}`: \
         |z| exceeded {limit:.0e} (z1={z1:.3e}, z2={z2:.3e}, z3={z3:.3e})"
    )]
    ObserverDivergence {
        channel: String,
        z1: f64,
        z2: f64,
        z3: f64,
        limit: f64,
    },

    /// Simulation state became non-finite.
    #[error("non-finite simulation state at t={t:.3} s (step {step}): {what}")]
    NonFiniteState { t: f64, step: u64, what: String },

    /// Waypoint geometry that cannot be filleted at the configured radius.
    #[error("infeasible path geometry at waypoint {index}: {reason}")]
    Geometry { index: usize, reason: String },

    /// A metric was requested over an empty run log.
    #[error("empty run log: {0}")]
    EmptyLog(&'static str),

    /// One or more repetitions failed (timeout or numeric fault). Maps to CLI exit code 3.
    #[error("{failed} of {total} runs failed: {detail}")]
    FailedRuns {
        failed: usize,
        total: usize,
        detail: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

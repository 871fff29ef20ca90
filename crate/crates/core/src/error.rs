use thiserror::Error;

/// Errors shared across all game, equilibrium, oracle, dynamics and sandbox
/// operations.
#[derive(Debug, Error)]
pub enum Error {
    /// A config failed validation; the message names the violated invariant.
    #[error("invalid config: {0}")]
    InvalidConfig(String),

    /// An argument is outside the documented domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A regularity assumption required by the closed-form analysis does not
    /// hold for this config (e.g. y <= 1 - p, or a zero attacker privacy
    /// preference).
    #[error("regularity error: {0}")]
    Regularity(String),

    /// The 4x4 multiplier system is numerically singular.
    #[error("singular multiplier system: |a11*a41*a32*a22 - a31*a12*a21*a42| = {det:e} <= 1e-9")]
    SingularSystem { det: f64 },

    /// An I/O or serialization failure surfaced by the CLI layer.
    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

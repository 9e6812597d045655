//! Error type shared by all engine modules.

use crate::state::ExtendedState;

pub type Result<T> = std::result::Result<T, Error>;

/// Everything that can go wrong while evaluating or integrating a scenario.
#[derive(Debug, Clone, thiserror::Error)]
pub enum Error {
    /// Evaluation outside the mathematical domain of an operation
    /// (singular Hamiltonian point, square root of a negative rate, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// A caller-facing precondition was violated.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// Proper time fell outside a tabulated potential's grid.
    #[error("tau = {tau} outside tabulated range [{min}, {max}]")]
    TauOutOfRange { tau: f64, min: f64, max: f64 },

    /// The mass decayed through zero; integration stops at the crossing.
    #[error("mass reached zero at t = {t_cross}; integration aborted")]
    MassDepleted {
        t_cross: f64,
        /// Last state with nonnegative mass, advanced to the crossing time.
        last: ExtendedState,
    },

    /// Adaptive step control shrank the step below the resolvable limit.
    #[error("adaptive step underflow at t = {t}")]
    StepUnderflow { t: f64 },

    /// A singularity or domain failure was hit mid-integration.
    #[error("integration aborted at t = {t}: {reason}")]
    Aborted {
        t: f64,
        last: ExtendedState,
        reason: String,
    },

    /// A boost-loop sequence does not compose to a pure translation.
    #[error("loop does not close: residual boost v = {v}")]
    NonClosingLoop { v: f64 },

    /// Relative phase of two packets that share no support is meaningless.
    #[error("insufficient packet overlap |<a|b>| = {overlap:.6} (need > {needed})")]
    InsufficientOverlap { overlap: f64, needed: f64 },

    /// A wave packet touched the grid edge (periodic wrap-around would corrupt it).
    #[error("wave packet reached the grid edge: {0}")]
    WrapAround(String),

    /// A packet specification does not fit inside the grid.
    #[error("packet does not fit the domain: {0}")]
    PacketDomain(String),

    /// Monte Carlo estimators need a minimum sample count.
    #[error("sample count {n} too small (need at least {min})")]
    SampleCount { n: usize, min: usize },
}

//! tauspace-core: extended phase-space mechanics in which proper time τ and
//! mass m form a conjugate pair alongside (x, p).
//!
//! The crate provides:
//!
//! * extended states and trajectories ([`state`]);
//! * a library of extended Hamiltonians H(x, p; τ, m) with analytic
//!   partials and a finite-difference audit ([`hamiltonian`]);
//! * integration of the doubled Hamilton equations with conservation
//!   audits ([`dynamics`]);
//! * two-particle barycentric kinematics and invariant mass
//!   ([`barycentric`]);
//! * quantum-phase constructions — twin-paradox phase, Galilean loop
//!   phases, cavity proper-time hypotheses, interferometer predictions
//!   ([`phase`]);
//! * mass-proper-time uncertainty products, analytic and Monte Carlo
//!   ([`uncertainty`]);
//! * a spectral wave-packet propagator used as an independent oracle for
//!   the phase conventions ([`wavepacket`]).
//!
//! Conventions: c = 1 everywhere; ħ is configurable (default 1); amplitudes
//! carry e^{-i m τ / ħ}.

pub mod barycentric;
pub mod dynamics;
pub mod error;
pub mod hamiltonian;
pub mod interp;
pub mod phase;
pub mod report;
pub mod state;
pub mod uncertainty;
pub mod wavepacket;

pub use error::{Error, Result};
pub use state::{ExtendedState, SpatialVec, Trajectory, Units};

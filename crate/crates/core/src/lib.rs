//! Exact linear-optics simulation of a heralded two-photon entanglement filter.
//!
//! The crate is organised bottom-up:
//!
//! * [`fock`]: mode bookkeeping and sparse Fock states,
//! * [`elements`]: optical elements, mode unitaries and circuits,
//! * [`format`]: the line-oriented circuit-description format,
//! * [`engine`]: evolution, the permanent oracle and heralded detection,
//! * [`filter`]: the entanglement-filter circuits and their heralded map,
//! * [`noise`]: photon distinguishability and the double-pair background,
//! * [`analysis`]: truth tables, fidelities and the process-fidelity report.

pub mod analysis;
pub mod elements;
pub mod engine;
pub mod error;
pub mod filter;
pub mod fock;
pub mod format;
pub mod noise;

pub use num_complex::Complex64 as C64;

pub use error::{Error, Result};

/// Validation tolerance (unitarity, normalisation).
pub const VALIDATION_TOL: f64 = 1e-12;
/// Tolerance for physics assertions (norms, probabilities).
pub const PHYSICS_TOL: f64 = 1e-10;
/// Amplitudes below this magnitude are dropped from sparse states.
pub const PRUNE_TOL: f64 = 1e-15;

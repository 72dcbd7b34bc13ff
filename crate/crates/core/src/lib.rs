//! Simulation and control toolkit for concurrent fSim (cfSim) gates driven
//! by bichromatic parametric tones on a transmon-coupler-transmon device.
//!
//! All frequencies are angular, in rad/ns. Times are in ns.
//!
//! Module layout:
//! - [`model`]: Hamiltonian builders over the tensor Fock basis and the
//!   two-qutrit toy model.
//! - [`spectrum`]: dressed-state diagonalization, labels and drive tables.
//! - [`analytics`]: closed-form coupling laws, control solvers and the
//!   generalized coupling series.
//! - [`dynamics`]: time propagation, envelopes, Rabi fits and the pulse
//!   amplitude surrogate.
//! - [`gate`]: projection onto the computational subspace, fSim angle
//!   extraction and fidelity.
//! - [`protocol`]: the per-point cfSim pipeline shared by sweeps and tests.

pub mod analytics;
pub mod dynamics;
pub mod error;
pub mod gate;
pub mod model;
pub mod numerics;
pub mod protocol;
pub mod spectrum;

pub use error::{Error, Result};

/// Converts an ordinary frequency in GHz to rad/ns.
pub fn ghz(f: f64) -> f64 {
    2.0 * std::f64::consts::PI * f
}

/// Converts an ordinary frequency in MHz to rad/ns.
pub fn mhz(f: f64) -> f64 {
    2.0 * std::f64::consts::PI * f * 1e-3
}

/// Converts rad/ns to ordinary MHz.
pub fn to_mhz(w: f64) -> f64 {
    w / (2.0 * std::f64::consts::PI) * 1e3
}

/// Converts rad/ns to ordinary GHz.
pub fn to_ghz(w: f64) -> f64 {
    w / (2.0 * std::f64::consts::PI)
}

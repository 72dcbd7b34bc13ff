//! Effective couplings of parametrically driven transitions.
//!
//! Values are real with sign; the `i` prefactor that the rotating frame
//! attaches to each coupling is a frame artifact and is dropped.

use serde::Serialize;

use crate::model::BasisIndex;
use crate::numerics::{bessel_j, j0_plus_j2};
use crate::spectrum::CouplingConstants;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EffectiveCoupling {
    pub g: f64,
    /// Residual detuning of the sideband; zero for a resonant drive.
    pub detuning: f64,
    #[serde(skip)]
    pub transition: (BasisIndex, BasisIndex),
}

/// A spectator tone that only dresses the coupling through `J_0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OffResonantTone {
    /// `N^k_a - N^k_b` of the driven mode.
    pub gamma: f64,
    pub amplitude: f64,
    pub frequency: f64,
}

impl OffResonantTone {
    pub fn factor(&self) -> f64 {
        bessel_j(0, self.gamma * self.amplitude / self.frequency)
    }
}

fn resonant_factor(c: &CouplingConstants, amplitude: f64, frequency: f64) -> f64 {
    c.alpha * amplitude * j0_plus_j2(c.beta * amplitude / frequency)
}

/// Single resonant drive: `g = alpha Omega [J_0 + J_2](beta Omega / nu)`.
pub fn g_single(c: &CouplingConstants, omega_1: f64, nu_1: f64) -> EffectiveCoupling {
    EffectiveCoupling { g: resonant_factor(c, omega_1, nu_1), detuning: 0.0, transition: c.transition }
}

/// Resonant drive 1 with an off-resonant drive 2 on the spectator mode.
pub fn g_crosstalk(c: &CouplingConstants, omega_1: f64, nu_1: f64, omega_2: f64, nu_2: f64) -> EffectiveCoupling {
    let spectator = OffResonantTone { gamma: c.gamma, amplitude: omega_2, frequency: nu_2 };
    EffectiveCoupling {
        g: resonant_factor(c, omega_1, nu_1) * spectator.factor(),
        detuning: 0.0,
        transition: c.transition,
    }
}

/// One resonant drive dressed by any number of off-resonant tones.
pub fn g_multi(c: &CouplingConstants, omega: f64, nu: f64, off_resonant: &[OffResonantTone]) -> EffectiveCoupling {
    let g = off_resonant.iter().fold(resonant_factor(c, omega, nu), |acc, t| acc * t.factor());
    EffectiveCoupling { g, detuning: 0.0, transition: c.transition }
}

/// `110 <-> 020` sideband driven by tone 2 with tone 1 as spectator.
///
/// `c` must hold the constants of that transition with mode 2 as the drive
/// mode; `gap` is the positive level spacing the sideband bridges, and the
/// returned detuning is `gap - nu_2`.
pub fn g_cphase(
    c: &CouplingConstants,
    omega_1: f64,
    nu_1: f64,
    omega_2: f64,
    nu_2: f64,
    gap: f64,
) -> EffectiveCoupling {
    let spectator = OffResonantTone { gamma: c.gamma, amplitude: omega_1, frequency: nu_1 };
    EffectiveCoupling {
        g: resonant_factor(c, omega_2, nu_2) * spectator.factor(),
        detuning: gap - nu_2,
        transition: c.transition,
    }
}

//! Closed forms of the two-qutrit toy model.

use std::f64::consts::PI;

use nalgebra::Matrix2;
use serde::Serialize;

use crate::model::ToyParams;
use crate::numerics::bessel_j;
use crate::{Error, Result};

/// Conditional phase and cycle time of a detuned `11 <-> 02` exchange:
/// `t_g = 2 pi / sqrt(D^2 + 4 g^2)`, `phi = pi (1 - D / sqrt(D^2 + 4 g^2))`.
pub fn toy_conditional_phase(detuning: f64, g: f64) -> Result<(f64, f64)> {
    let rate = (detuning * detuning + 4.0 * g * g).sqrt();
    if rate == 0.0 || !rate.is_finite() {
        return Err(Error::Undefined("conditional phase needs detuning or coupling".into()));
    }
    Ok((PI * (1.0 - detuning / rate), 2.0 * PI / rate))
}

/// Weak-drive reduction of the toy model to two independent exchanges.
///
/// `iswap` acts on `(|01>, |10>)`, `cphase` on `(|11>, |02>)`, each in the
/// frame that removes its residual sideband detuning.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ToyBlocks {
    #[serde(skip)]
    pub iswap: Matrix2<f64>,
    #[serde(skip)]
    pub cphase: Matrix2<f64>,
    /// `g J_1(x_1) J_0(x_2)`.
    pub iswap_coupling: f64,
    /// `sqrt(2) g J_0(x_1) J_1(x_2)`.
    pub cphase_coupling: f64,
    /// Residual iSWAP detuning `D - nu_1`.
    pub iswap_detuning: f64,
    /// Residual CPHASE detuning `(D - d) - nu_2`.
    pub epsilon: f64,
}

/// Block Hamiltonians with Bessel arguments `x_k = Omega_k / nu_k`.
pub fn toy_block_hamiltonians(params: &ToyParams) -> ToyBlocks {
    let x1 = params.drives[0].index();
    let x2 = params.drives[1].index();
    let g = params.coupling;
    let iswap_coupling = g * bessel_j(1, x1) * bessel_j(0, x2);
    let cphase_coupling = std::f64::consts::SQRT_2 * g * bessel_j(0, x1) * bessel_j(1, x2);
    let iswap_detuning = params.detuning - params.drives[0].frequency;
    let epsilon = (params.detuning - params.anharmonicity) - params.drives[1].frequency;
    ToyBlocks {
        iswap: Matrix2::new(0.0, iswap_coupling, iswap_coupling, iswap_detuning),
        cphase: Matrix2::new(0.0, cphase_coupling, cphase_coupling, -epsilon),
        iswap_coupling,
        cphase_coupling,
        iswap_detuning,
        epsilon,
    }
}

/// Population left in the first state of a static two-level block
/// `[[0, c], [c, d]]` after time `t`, starting from that state.
pub fn two_level_return_probability(coupling: f64, detuning: f64, t: f64) -> f64 {
    let w = (0.25 * detuning * detuning + coupling * coupling).sqrt();
    if w == 0.0 {
        return 1.0;
    }
    let s = (w * t).sin();
    1.0 - (coupling / w).powi(2) * s * s
}

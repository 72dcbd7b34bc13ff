//! Closed-form predictions: Bessel-factor couplings, the generalized
//! coupling series, control-law solvers and toy-model formulas.

pub mod control;
pub mod couplings;
pub mod series;
pub mod toy;

pub use control::{
    idle_zz_cancel, invert_targets, predict_theta_phi, solve_optimal_amplitude, AmplitudeOptions, AmplitudeSolution,
    CfsimConstants, ControlSolution, IdleSolution, Prediction, ThetaLaw,
};
pub use couplings::{g_cphase, g_crosstalk, g_multi, g_single, EffectiveCoupling, OffResonantTone};
pub use series::{g_series, resonance_scan, stationary_terms, GTerm, Resonance, ScanOptions};
pub use toy::{toy_block_hamiltonians, toy_conditional_phase, ToyBlocks};

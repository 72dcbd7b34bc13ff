//! Control laws of the concurrent fSim gate.
//!
//! Tone 1 drives `100 <-> 010` resonantly through qubit 1; tone 2 drives the
//! `110 <-> 020` sideband through qubit 2. The `110` population completes
//! one closed cycle in the gate time, which fixes the tone-2 amplitude and
//! leaves a conditional phase `pi - eps t_g / 2 - xi_zz t_g`, where `eps` is
//! the sideband detuning.

use std::f64::consts::PI;

use serde::Serialize;

use crate::analytics::couplings::{g_cphase, g_crosstalk};
use crate::model::{BasisIndex, Mode};
use crate::numerics::bessel::J1_FIRST_MAX;
use crate::numerics::roots::{bracketed_root, RootOptions};
use crate::numerics::{bessel_j, j0_plus_j2, wrap_phase};
use crate::spectrum::{coupling_constants, zz_strength, CouplingConstants, DressedFrame};
use crate::{Error, Result};

/// Device constants entering every control law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CfsimConstants {
    /// `100 <-> 010`, drive mode 1, spectator mode 2.
    pub iswap: CouplingConstants,
    /// `110 <-> 020`, drive mode 2, spectator mode 1.
    pub cphase: CouplingConstants,
    /// Resonant iSWAP tone frequency `|w~_010 - w~_100|`.
    pub nu_1: f64,
    /// Signed sideband gap `w~_020 - w~_110`.
    pub gap: f64,
    pub xi_zz: f64,
}

impl CfsimConstants {
    pub fn from_frame(frame: &DressedFrame) -> Result<Self> {
        let l = |s: &str| -> BasisIndex { s.parse().expect("static label") };
        let iswap = coupling_constants(frame, (l("100"), l("010")), Mode::Q1, Mode::Q2)?;
        let cphase = coupling_constants(frame, (l("110"), l("020")), Mode::Q2, Mode::Q1)?;
        Ok(Self {
            iswap,
            cphase,
            nu_1: (frame.energy(l("010"))? - frame.energy(l("100"))?).abs(),
            gap: frame.energy(l("020"))? - frame.energy(l("110"))?,
            xi_zz: zz_strength(frame)?,
        })
    }

    /// Sideband detuning `eps` of a tone at `nu_2`; zero on resonance.
    pub fn sideband_detuning(&self, nu_2: f64) -> f64 {
        self.gap - self.gap.signum() * nu_2
    }

    /// Tone frequency producing sideband detuning `eps`.
    pub fn nu_2_for_detuning(&self, eps: f64) -> f64 {
        self.gap.signum() * (self.gap - eps)
    }

    /// `|eps| <= 2 pi / t_g`, with the same relative slack as the amplitude
    /// solve so that `nu_2_for_detuning(+-2 pi / t_g)` counts as feasible.
    pub fn feasible(&self, t_g: f64, nu_2: f64) -> bool {
        self.sideband_detuning(nu_2).abs() <= 2.0 * PI / t_g * (1.0 + 1e-12)
    }

    fn cphase_spectator(&self, omega_1: f64, nu_1: f64) -> f64 {
        self.cphase.alpha * bessel_j(0, self.cphase.gamma * omega_1 / nu_1)
    }
}

/// Search settings for amplitude solves.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AmplitudeOptions {
    /// Upper end of the amplitude search (rad/ns); the first monotone branch
    /// of `Omega [J_0 + J_2](b Omega / nu)` ends earlier and always caps it.
    pub max_amplitude: f64,
    pub root: RootOptions,
}

impl Default for AmplitudeOptions {
    fn default() -> Self {
        Self { max_amplitude: f64::INFINITY, root: RootOptions::default() }
    }
}

/// Smallest `x >= 0` solving `scale * x * [J_0 + J_2](b x / nu) = target` on
/// the first monotone branch.
fn solve_branch(scale: f64, b: f64, nu: f64, target: f64, opts: &AmplitudeOptions) -> Result<f64> {
    let scale = scale.abs();
    if target == 0.0 {
        return Ok(0.0);
    }
    if scale == 0.0 {
        return Err(Error::NoRoot("coupling prefactor vanishes".into()));
    }
    let branch_end = if b == 0.0 { f64::INFINITY } else { J1_FIRST_MAX * nu / b.abs() };
    let upper = branch_end.min(opts.max_amplitude);
    let f = |x: f64| scale * x * j0_plus_j2(b * x / nu) - target;
    let upper = if upper.is_finite() {
        upper
    } else {
        // linear law: the root is at target / scale
        2.0 * target / scale
    };
    if f(upper) < 0.0 {
        return Err(Error::NoRoot(format!(
            "coupling {target:.4e} rad/ns exceeds the reachable maximum {:.4e} rad/ns",
            f(upper) + target
        )));
    }
    bracketed_root(f, 0.0, upper, opts.root)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum AmplitudeSolution {
    Solved {
        omega_2: f64,
        g_2: f64,
    },
    /// The sideband detuning is too large for a closed cycle in `t_g`.
    Infeasible {
        detuning: f64,
    },
    /// The needed coupling is out of reach on the first branch.
    Unsolvable {
        reason: String,
    },
}

/// Tone-2 amplitude closing the `110 -> 020 -> 110` cycle exactly once in
/// `t_g`: `alpha Omega_2 J_0(gamma Omega_1/nu_1) [J_0 + J_2](beta Omega_2/nu_2)
/// = sqrt((pi/t_g)^2 - (eps/2)^2)`.
pub fn solve_optimal_amplitude(
    c: &CfsimConstants,
    t_g: f64,
    omega_1: f64,
    nu_1: f64,
    nu_2: f64,
    opts: &AmplitudeOptions,
) -> AmplitudeSolution {
    let eps = c.sideband_detuning(nu_2);
    let half_rate = PI / t_g;
    let disc = half_rate * half_rate - 0.25 * eps * eps;
    if disc < -1e-12 * half_rate * half_rate {
        return AmplitudeSolution::Infeasible { detuning: eps };
    }
    let target = disc.max(0.0).sqrt();
    let prefactor = c.cphase_spectator(omega_1, nu_1);
    match solve_branch(prefactor, c.cphase.beta, nu_2, target, opts) {
        Ok(omega_2) => AmplitudeSolution::Solved { omega_2, g_2: prefactor.signum() * target },
        Err(e) => AmplitudeSolution::Unsolvable { reason: e.to_string() },
    }
}

/// Analytic gate angles of one operating point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Prediction {
    /// `asin(sin^2(g_1 t_g))`, the closed-form law as stated for this scheme.
    pub theta: f64,
    /// `asin|sin(g_1 t_g)|`, the swap angle of a resonant exchange.
    pub theta_rabi: f64,
    /// `pi - eps t_g / 2 - xi_zz t_g`, wrapped to `[-pi, pi)`.
    pub phi: f64,
    pub g_1: f64,
    pub g_2: f64,
    pub detuning: f64,
}

pub fn predict_theta_phi(c: &CfsimConstants, t_g: f64, omega_1: f64, nu_1: f64, nu_2: f64, omega_2: f64) -> Prediction {
    let g_1 = g_crosstalk(&c.iswap, omega_1, nu_1, omega_2, nu_2).g;
    let eps = c.sideband_detuning(nu_2);
    let g_2 = g_cphase(&c.cphase, omega_1, nu_1, omega_2, nu_2, c.gap.abs()).g;
    let s = (g_1 * t_g).sin();
    Prediction {
        theta: (s * s).clamp(0.0, 1.0).asin(),
        theta_rabi: s.abs().min(1.0).asin(),
        phi: wrap_phase(PI - 0.5 * eps * t_g - c.xi_zz * t_g),
        g_1,
        g_2,
        detuning: eps,
    }
}

/// How a target swap angle maps to the iSWAP coupling.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ThetaLaw {
    /// `g_1 = arccos(1 - 2 sin theta) / (2 t_g)`.
    #[default]
    Closed,
    /// `g_1 = theta / t_g`.
    Rabi,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ControlSolution {
    pub nu_1: f64,
    pub nu_2: f64,
    pub omega_1: f64,
    pub omega_2: f64,
    pub theta: f64,
    pub theta_rabi: f64,
    pub phi: f64,
    pub g_1: f64,
    pub g_2: f64,
    pub feasible: bool,
    pub iterations: usize,
}

/// Tone parameters realizing `(theta, phi)`.
///
/// The conditional-phase law is `2 pi`-periodic in `phi`, so the sideband
/// detuning is taken on the branch with `|eps| <= 2 pi / t_g`, which always
/// exists. `(Omega_1, Omega_2)` then come from alternating scalar solves of
/// the two coupled coupling laws.
pub fn invert_targets(
    c: &CfsimConstants,
    t_g: f64,
    theta: f64,
    phi: f64,
    law: ThetaLaw,
    opts: &AmplitudeOptions,
) -> Result<ControlSolution> {
    if !(0.0..=PI / 2.0 + 1e-12).contains(&theta) {
        return Err(Error::Config(format!("target theta {theta} outside [0, pi/2]")));
    }
    if !(-PI - 1e-12..=PI + 1e-12).contains(&phi) {
        return Err(Error::Config(format!("target phi {phi} outside [-pi, pi]")));
    }
    let g_1 = match law {
        ThetaLaw::Closed => (1.0 - 2.0 * theta.sin()).clamp(-1.0, 1.0).acos() / (2.0 * t_g),
        ThetaLaw::Rabi => theta / t_g,
    };
    let period = 2.0 * PI / t_g;
    let raw = (PI - phi) / t_g - c.xi_zz;
    let half_eps = raw - period * (raw / period).round();
    let eps = 2.0 * half_eps;
    let nu_2 = c.nu_2_for_detuning(eps);
    let half_rate = PI / t_g;
    let g_2_abs = (half_rate * half_rate - half_eps * half_eps).max(0.0).sqrt();
    let nu_1 = c.nu_1;

    let mut omega_1 = 0.0;
    let mut omega_2 = 0.0;
    let mut iterations = 0;
    let mut converged = false;
    for it in 1..=200 {
        iterations = it;
        let prefactor_2 = c.cphase_spectator(omega_1, nu_1);
        let next_2 = solve_branch(prefactor_2, c.cphase.beta, nu_2, g_2_abs, opts)?;
        let prefactor_1 = c.iswap.alpha * bessel_j(0, c.iswap.gamma * next_2 / nu_2);
        let next_1 = solve_branch(prefactor_1, c.iswap.beta, nu_1, g_1, opts)?;
        let change = (next_1 - omega_1).abs().max((next_2 - omega_2).abs());
        omega_1 = next_1;
        omega_2 = next_2;
        if change <= 1e-12 * (1.0 + omega_1.max(omega_2)) {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NoConvergence(format!("amplitude inversion after {iterations} iterations")));
    }
    let p = predict_theta_phi(c, t_g, omega_1, nu_1, nu_2, omega_2);
    Ok(ControlSolution {
        nu_1,
        nu_2,
        omega_1,
        omega_2,
        theta: p.theta,
        theta_rabi: p.theta_rabi,
        phi: p.phi,
        g_1: p.g_1,
        g_2: p.g_2,
        feasible: true,
        iterations,
    })
}

/// Off-resonant tone-2 setting that cancels the idle conditional phase.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IdleSolution {
    pub omega: f64,
    pub g: f64,
    /// Sideband detuning of the tone.
    pub detuning: f64,
    /// Cycle time `2 pi / sqrt(detuning^2 + 4 g^2)`.
    pub gate_time: f64,
}

/// Amplitude of a tone at `nu` on qubit 2 meeting
/// `g^2 - xi_zz eps = xi_zz^2 / 4`.
pub fn idle_zz_cancel(c: &CfsimConstants, nu: f64, opts: &AmplitudeOptions) -> Result<IdleSolution> {
    let eps = c.sideband_detuning(nu);
    let xi = c.xi_zz;
    let g_sq = xi * eps + 0.25 * xi * xi;
    if g_sq < 0.0 {
        return Err(Error::NoRoot(format!("no real coupling: xi_zz * detuning + xi_zz^2/4 = {g_sq:.3e} < 0")));
    }
    let g = g_sq.sqrt();
    let omega = solve_branch(c.cphase.alpha, c.cphase.beta, nu, g, opts)?;
    let rate = (eps * eps + 4.0 * g * g).sqrt();
    if rate == 0.0 {
        return Err(Error::Undefined("zero detuning and zero coupling".into()));
    }
    Ok(IdleSolution { omega, g: c.cphase.alpha.signum() * g, detuning: eps, gate_time: 2.0 * PI / rate })
}

//! Envelope scale optimization on a few-level dressed surrogate.
//!
//! The surrogate keeps only the listed dressed states, with every tone's
//! diagonal (`N`) and off-diagonal (`C`) drive terms, in the frame rotating
//! with the dressed energies. The optimized factor multiplies one tone's
//! envelope and minimizes the population that leaves the first listed state.

use nalgebra::{DMatrix, Matrix2};
use serde::Serialize;

use crate::dynamics::propagate::propagate_generic;
use crate::model::{BasisIndex, DriveTone};
use crate::numerics::roots::golden_section;
use crate::numerics::C64;
use crate::spectrum::DressedFrame;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct PulseOptions {
    pub range: (f64, f64),
    pub tolerance: f64,
    /// Points of the coarse scan preceding the golden-section search.
    pub coarse_points: usize,
    /// Surrogate time step (ns).
    pub dt: f64,
}

impl Default for PulseOptions {
    fn default() -> Self {
        Self { range: (0.5, 3.0), tolerance: 1e-4, coarse_points: 26, dt: 5e-3 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PulseFactor {
    pub gamma: f64,
    /// Population outside the first surrogate state at the gate end.
    pub objective: f64,
    pub warning: Option<String>,
}

struct Surrogate {
    energies: Vec<f64>,
    /// Per tone: generator restricted to the surrogate states.
    generators: Vec<DMatrix<f64>>,
}

impl Surrogate {
    fn new(frame: &DressedFrame, tones: &[DriveTone], labels: &[BasisIndex]) -> Result<Self> {
        let idx: Vec<usize> = labels.iter().map(|&l| frame.index(l)).collect::<Result<_>>()?;
        let n = idx.len();
        let energies = idx.iter().map(|&i| frame.energies[i]).collect();
        let generators = tones
            .iter()
            .map(|t| {
                let k = t.mode.slot();
                DMatrix::from_fn(n, n, |a, b| {
                    if a == b {
                        frame.n_coeffs[k][idx[a]]
                    } else {
                        frame.c_coeffs[k][(idx[a], idx[b])]
                    }
                })
            })
            .collect();
        Ok(Self { energies, generators })
    }

    fn drive_values(tones: &[DriveTone], scaled: usize, gamma: f64, t: f64) -> Vec<f64> {
        tones.iter().enumerate().map(|(i, tone)| tone.value(t) * if i == scaled { gamma } else { 1.0 }).collect()
    }

    fn hamiltonian(&self, values: &[f64], t: f64) -> DMatrix<C64> {
        let n = self.energies.len();
        DMatrix::from_fn(n, n, |a, b| {
            let amp: f64 = values.iter().zip(&self.generators).map(|(v, g)| v * g[(a, b)]).sum();
            C64::from_polar(amp, (self.energies[a] - self.energies[b]) * t)
        })
    }

    fn hamiltonian2(&self, values: &[f64], t: f64) -> Matrix2<C64> {
        let mut d = [0.0; 2];
        let mut off = 0.0;
        for (v, g) in values.iter().zip(&self.generators) {
            d[0] += v * g[(0, 0)];
            d[1] += v * g[(1, 1)];
            off += v * g[(0, 1)];
        }
        let c = C64::from_polar(off, (self.energies[0] - self.energies[1]) * t);
        Matrix2::new(C64::new(d[0], 0.0), c, c.conj(), C64::new(d[1], 0.0))
    }
}

fn expm2(h: &Matrix2<C64>, tau: f64) -> Matrix2<C64> {
    let a = 0.5 * (h[(0, 0)].re + h[(1, 1)].re);
    let bz = 0.5 * (h[(0, 0)].re - h[(1, 1)].re);
    let off = h[(0, 1)];
    let norm = (off.norm_sqr() + bz * bz).sqrt();
    let (c, s) = if norm == 0.0 { (1.0, tau) } else { ((norm * tau).cos(), (norm * tau).sin() / norm) };
    let g = C64::from_polar(1.0, -a * tau);
    let mi = C64::new(0.0, -s);
    Matrix2::new(g * (C64::new(c, 0.0) + mi * bz), g * mi * off, g * mi * off.conj(), g * (C64::new(c, 0.0) - mi * bz))
}

/// Population remaining in `labels[0]` at `gate_time`, starting there, with
/// tone `scaled` multiplied by `gamma`.
pub fn surrogate_population(
    frame: &DressedFrame,
    tones: &[DriveTone],
    scaled: usize,
    gamma: f64,
    labels: &[BasisIndex],
    gate_time: f64,
    dt: f64,
) -> Result<f64> {
    if labels.len() < 2 {
        return Err(Error::Config("surrogate needs at least two states".into()));
    }
    let s = Surrogate::new(frame, tones, labels)?;
    let steps = (gate_time / dt).ceil().max(1.0) as usize;
    let h = gate_time / steps as f64;
    if labels.len() == 2 {
        let c = 3f64.sqrt() / 6.0;
        let mut psi = nalgebra::Vector2::new(C64::new(1.0, 0.0), C64::new(0.0, 0.0));
        for k in 0..steps {
            let t0 = k as f64 * h;
            let (ta, tb) = (t0 + (0.5 - c) * h, t0 + (0.5 + c) * h);
            let h1 = s.hamiltonian2(&Surrogate::drive_values(tones, scaled, gamma, ta), ta);
            let h2 = s.hamiltonian2(&Surrogate::drive_values(tones, scaled, gamma, tb), tb);
            let comm = h2 * h1 - h1 * h2;
            let h_eff = (h1 + h2) * C64::new(0.5, 0.0) + comm * C64::new(0.0, -(3f64.sqrt()) * h / 12.0);
            psi = expm2(&h_eff, h) * psi;
        }
        return Ok(psi[0].norm_sqr());
    }
    let n = labels.len();
    let mut psi0 = DMatrix::<C64>::zeros(n, 1);
    psi0[(0, 0)] = C64::new(1.0, 0.0);
    let evo = propagate_generic(
        |t| s.hamiltonian(&Surrogate::drive_values(tones, scaled, gamma, t), t),
        0.0,
        gate_time,
        steps,
        &psi0,
        1,
    );
    Ok(evo.final_state()[(0, 0)].norm_sqr())
}

/// Envelope factor of tone `scaled` minimizing the surrogate loss.
///
/// A coarse scan locates the interior local minimum with loss below 5% that
/// lies closest to the pulse-area estimate `t_g / integral(f)` (the global
/// coarse minimum otherwise); golden-section search refines it.
pub fn optimize_pulse_factor(
    frame: &DressedFrame,
    tones: &[DriveTone],
    scaled: usize,
    labels: &[BasisIndex],
    gate_time: f64,
    opts: &PulseOptions,
) -> Result<PulseFactor> {
    if scaled >= tones.len() {
        return Err(Error::Config(format!("tone index {scaled} out of range")));
    }
    let (lo, hi) = opts.range;
    let loss = |g: f64| surrogate_population(frame, tones, scaled, g, labels, gate_time, opts.dt).map(|p| 1.0 - p);
    let n = opts.coarse_points.max(3);
    let xs: Vec<f64> = (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect();
    let ys: Vec<f64> = xs.iter().map(|&x| loss(x)).collect::<Result<_>>()?;
    let estimate = gate_time / tones[scaled].envelope.unit_area(gate_time);
    let interior_min = |i: usize| i > 0 && i + 1 < n && ys[i] <= ys[i - 1] && ys[i] <= ys[i + 1];
    let global = (0..n).fold(0, |b, i| if ys[i] < ys[b] { i } else { b });
    let pick = (0..n)
        .filter(|&i| interior_min(i) && ys[i] < 0.05)
        .min_by(|&i, &j| (xs[i] - estimate).abs().total_cmp(&(xs[j] - estimate).abs()))
        .unwrap_or(global);
    let a = xs[pick.saturating_sub(1)];
    let b = xs[(pick + 1).min(n - 1)];
    let mut failure = None;
    let (gamma, objective) = golden_section(
        |g| match loss(g) {
            Ok(v) => v,
            Err(e) => {
                failure = Some(e);
                f64::INFINITY
            }
        },
        a,
        b,
        opts.tolerance,
    );
    if let Some(e) = failure {
        return Err(e);
    }
    let warning = ((gamma - lo).abs() <= 2.0 * opts.tolerance || (hi - gamma).abs() <= 2.0 * opts.tolerance)
        .then(|| format!("optimum {gamma:.4} sits on the search boundary; the operating point is likely infeasible"));
    Ok(PulseFactor { gamma, objective, warning })
}

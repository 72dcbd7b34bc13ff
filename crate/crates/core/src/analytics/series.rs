//! Generalized rotating-frame coupling series.
//!
//! In the frame co-rotating with every dressed energy and its diagonal drive
//! modulation, the coupling between dressed states `a` and `b` is
//! `G_ab(t) = sum_n amplitude_n exp(i frequency_n t)` with
//! `frequency_n = w~_a - w~_b - n_r nu_r - n_1 nu_1 - n_2 nu_2` and
//! `amplitude_n = sum_m A_n(m) Omega_m C^m_ab i^(n_r + n_1 + n_2) exp(-i sum_j n_j phi_j)`.
//! `A_n(m)` is `[J_{n_m+1} + J_{n_m-1}](-s_m) / 2` times `J_{n_j}(-s_j)` for
//! the other driven modes, with `s_j = (N^j_a - N^j_b) Omega_j / nu_j`.

use serde::Serialize;

use crate::model::{BasisIndex, DriveTone, Mode};
use crate::numerics::{bessel_j, C64};
use crate::spectrum::DressedFrame;
use crate::{Error, Result};

/// One Fourier component of `G_ab(t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GTerm {
    pub n_r: i32,
    pub n_1: i32,
    pub n_2: i32,
    pub amplitude: C64,
    pub frequency: f64,
}

impl GTerm {
    pub fn index(&self, mode: Mode) -> i32 {
        match mode {
            Mode::Coupler => self.n_r,
            Mode::Q1 => self.n_1,
            Mode::Q2 => self.n_2,
        }
    }

    pub fn photon_sum(&self) -> i32 {
        self.n_r + self.n_1 + self.n_2
    }

    /// Amplitude with the `i^(n_r + n_1 + n_2)` frame factor removed.
    pub fn stripped_amplitude(&self) -> C64 {
        self.amplitude * C64::new(0.0, -1.0).powi(self.photon_sum())
    }
}

fn tones_by_mode(tones: &[DriveTone]) -> Result<[Option<&DriveTone>; 3]> {
    let mut by_mode: [Option<&DriveTone>; 3] = [None; 3];
    for t in tones {
        let slot = &mut by_mode[t.mode.slot()];
        if slot.is_some() {
            return Err(Error::Config(format!("more than one tone drives mode {}", t.mode)));
        }
        *slot = Some(t);
    }
    Ok(by_mode)
}

fn index_grid(driven: &[Mode], cutoff: i32) -> Vec<[i32; 3]> {
    let mut out = vec![[0i32; 3]];
    for &m in driven {
        let mut next = Vec::with_capacity(out.len() * (2 * cutoff as usize + 1));
        for base in &out {
            for n in -cutoff..=cutoff {
                let mut idx = *base;
                idx[m.slot()] = n;
                next.push(idx);
            }
        }
        out = next;
    }
    out
}

fn make_term(idx: [i32; 3], amplitude: C64, frequency: f64) -> GTerm {
    GTerm { n_r: idx[Mode::Coupler.slot()], n_1: idx[Mode::Q1.slot()], n_2: idx[Mode::Q2.slot()], amplitude, frequency }
}

/// Fourier components of `G_ab(t)` for `transition = (a, b)` with every
/// driven-mode index in `[-cutoff, cutoff]`. Undriven modes carry index 0.
/// At most one tone per mode.
pub fn g_series(
    frame: &DressedFrame,
    transition: (BasisIndex, BasisIndex),
    tones: &[DriveTone],
    cutoff: u32,
) -> Result<Vec<GTerm>> {
    let (a, b) = transition;
    let (ia, ib) = (frame.index(a)?, frame.index(b)?);
    let by_mode = tones_by_mode(tones)?;
    let driven: Vec<Mode> = Mode::ALL.into_iter().filter(|m| by_mode[m.slot()].is_some()).collect();
    let base = frame.energies[ia] - frame.energies[ib];

    let mut s = [0.0; 3];
    let mut c = [0.0; 3];
    for &m in &driven {
        let t = by_mode[m.slot()].expect("driven");
        let k = m.slot();
        s[k] = (frame.n_coeffs[k][ia] - frame.n_coeffs[k][ib]) * t.amplitude / t.frequency;
        c[k] = frame.c_coeffs[k][(ia, ib)];
    }

    let mut out = Vec::new();
    for idx in index_grid(&driven, cutoff as i32) {
        let mut frequency = base;
        let mut phase = 0.0;
        for &m in &driven {
            let t = by_mode[m.slot()].expect("driven");
            frequency -= idx[m.slot()] as f64 * t.frequency;
            phase -= idx[m.slot()] as f64 * t.phase;
        }
        let mut total = 0.0;
        for &m in &driven {
            let t = by_mode[m.slot()].expect("driven");
            let k = m.slot();
            let nm = idx[k];
            let mut a_m = 0.5 * (bessel_j(nm + 1, -s[k]) + bessel_j(nm - 1, -s[k]));
            for &j in &driven {
                if j != m {
                    a_m *= bessel_j(idx[j.slot()], -s[j.slot()]);
                }
            }
            total += a_m * t.amplitude * c[k];
        }
        let photons: i32 = idx.iter().sum();
        let amplitude = C64::new(total, 0.0) * C64::new(0.0, 1.0).powi(photons) * C64::from_polar(1.0, phase);
        out.push(make_term(idx, amplitude, frequency));
    }
    Ok(out)
}

/// Terms whose oscillation frequency is within `tol` of zero.
pub fn stationary_terms(terms: &[GTerm], tol: f64) -> Vec<GTerm> {
    terms.iter().copied().filter(|t| t.frequency.abs() <= tol).collect()
}

/// One multi-photon resonance `w~_upper - w~_lower = sum_m n_m nu_m`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Resonance {
    pub upper: String,
    pub lower: String,
    pub n_r: i32,
    pub n_1: i32,
    pub n_2: i32,
    /// `|w~_upper - w~_lower - sum n nu|` in rad/ns.
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanOptions {
    /// Largest photon number per driven mode.
    pub max_photons: u32,
    /// Largest reported residual (rad/ns).
    pub threshold: f64,
    /// Restrict to transitions among these states; all states if `None`.
    pub labels: Option<Vec<BasisIndex>>,
}

impl Default for ScanOptions {
    fn default() -> Self {
        Self { max_photons: 3, threshold: crate::mhz(10.0), labels: None }
    }
}

/// All resonance conditions met within `threshold`, sorted by residual.
///
/// Pairs are taken within one invariant block of the undriven Hamiltonian
/// and written with the higher dressed energy first. Each state also appears
/// as its own zero-photon self-transition.
pub fn resonance_scan(frame: &DressedFrame, tones: &[DriveTone], opts: &ScanOptions) -> Result<Vec<Resonance>> {
    let by_mode = tones_by_mode(tones)?;
    let driven: Vec<Mode> = Mode::ALL.into_iter().filter(|m| by_mode[m.slot()].is_some()).collect();
    let states: Vec<usize> = match &opts.labels {
        Some(labels) => labels.iter().map(|&l| frame.index(l)).collect::<Result<_>>()?,
        None => (0..frame.dimension()).collect(),
    };
    let grid = index_grid(&driven, opts.max_photons as i32);
    let mut out = Vec::new();
    for (p, &i) in states.iter().enumerate() {
        out.push(Resonance {
            upper: frame.label(i).to_string(),
            lower: frame.label(i).to_string(),
            n_r: 0,
            n_1: 0,
            n_2: 0,
            residual: 0.0,
        });
        for &j in &states[p + 1..] {
            if !frame.same_block(i, j) {
                continue;
            }
            let (hi, lo) = if frame.energies[i] >= frame.energies[j] { (i, j) } else { (j, i) };
            let gap = frame.energies[hi] - frame.energies[lo];
            for idx in &grid {
                let photon_energy: f64 =
                    driven.iter().map(|m| idx[m.slot()] as f64 * by_mode[m.slot()].expect("driven").frequency).sum();
                let residual = (gap - photon_energy).abs();
                if residual <= opts.threshold {
                    out.push(Resonance {
                        upper: frame.label(hi).to_string(),
                        lower: frame.label(lo).to_string(),
                        n_r: idx[Mode::Coupler.slot()],
                        n_1: idx[Mode::Q1.slot()],
                        n_2: idx[Mode::Q2.slot()],
                        residual,
                    });
                }
            }
        }
    }
    out.sort_by(|x, y| {
        x.residual
            .total_cmp(&y.residual)
            .then_with(|| x.upper.cmp(&y.upper))
            .then_with(|| x.lower.cmp(&y.lower))
            .then_with(|| (x.n_r, x.n_1, x.n_2).cmp(&(y.n_r, y.n_1, y.n_2)))
    });
    Ok(out)
}

//! Hamiltonian builders.
//!
//! The full model lives on the tensor Fock basis `|q1 q2 r>` with flat index
//! `q1 * dim_2 * dim_c + q2 * dim_c + r` (qubit 1 slowest, coupler fastest).
//! Frequencies are angular (rad/ns).
//!
//! The toy model uses the five-state basis `(|01>, |10>, |11>, |02>, |20>)`.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::dynamics::envelope::EnvelopeSpec;
use crate::numerics::C64;
use crate::{ghz, mhz, Error, Result};

/// Largest accepted tensor dimension unless overridden.
pub const DEFAULT_DIMENSION_CAP: usize = 200;

/// A physical mode of the device.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Mode {
    #[serde(rename = "1")]
    Q1,
    #[serde(rename = "2")]
    Q2,
    #[serde(rename = "c")]
    Coupler,
}

impl Mode {
    pub const ALL: [Mode; 3] = [Mode::Q1, Mode::Q2, Mode::Coupler];

    /// Position of the mode in `[q1, q2, r]`.
    pub fn slot(self) -> usize {
        match self {
            Mode::Q1 => 0,
            Mode::Q2 => 1,
            Mode::Coupler => 2,
        }
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "1" | "q1" | "Q1" => Ok(Mode::Q1),
            "2" | "q2" | "Q2" => Ok(Mode::Q2),
            "c" | "C" | "coupler" => Ok(Mode::Coupler),
            other => Err(Error::InvalidMode(other.to_string())),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Q1 => "1",
            Mode::Q2 => "2",
            Mode::Coupler => "c",
        })
    }
}

/// Occupation-number label `|q1 q2 r>`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BasisIndex {
    pub q1: usize,
    pub q2: usize,
    pub r: usize,
}

impl BasisIndex {
    pub const fn new(q1: usize, q2: usize, r: usize) -> Self {
        Self { q1, q2, r }
    }

    pub fn occupation(&self, mode: Mode) -> usize {
        match mode {
            Mode::Q1 => self.q1,
            Mode::Q2 => self.q2,
            Mode::Coupler => self.r,
        }
    }

    pub fn excitations(&self) -> usize {
        self.q1 + self.q2 + self.r
    }

    pub fn fits(&self, dims: [usize; 3]) -> bool {
        self.q1 < dims[0] && self.q2 < dims[1] && self.r < dims[2]
    }

    /// Flat index; the label must fit `dims`.
    pub fn flat(&self, dims: [usize; 3]) -> usize {
        debug_assert!(self.fits(dims));
        self.q1 * dims[1] * dims[2] + self.q2 * dims[2] + self.r
    }

    pub fn from_flat(flat: usize, dims: [usize; 3]) -> Self {
        let r = flat % dims[2];
        let q2 = (flat / dims[2]) % dims[1];
        let q1 = flat / (dims[1] * dims[2]);
        Self { q1, q2, r }
    }

    fn with(&self, mode: Mode, n: usize) -> Self {
        let mut out = *self;
        match mode {
            Mode::Q1 => out.q1 = n,
            Mode::Q2 => out.q2 = n,
            Mode::Coupler => out.r = n,
        }
        out
    }
}

impl FromStr for BasisIndex {
    type Err = Error;

    /// Accepts `"110"` (single digits) or `"1,1,10"`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let parts: Vec<usize> = if s.contains(',') {
            s.split(',')
                .map(|p| p.trim().parse::<usize>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| Error::Config(format!("bad state label `{s}`")))?
        } else {
            s.chars()
                .map(|c| c.to_digit(10).map(|d| d as usize))
                .collect::<Option<_>>()
                .ok_or_else(|| Error::Config(format!("bad state label `{s}`")))?
        };
        match parts[..] {
            [q1, q2, r] => Ok(Self { q1, q2, r }),
            _ => Err(Error::Config(format!("state label `{s}` needs three occupations"))),
        }
    }
}

impl fmt::Display for BasisIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.q1 < 10 && self.q2 < 10 && self.r < 10 {
            write!(f, "{}{}{}", self.q1, self.q2, self.r)
        } else {
            write!(f, "{},{},{}", self.q1, self.q2, self.r)
        }
    }
}

/// Undriven device: two Kerr oscillators coupled through a coupler mode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviceParams {
    pub omega_1: f64,
    pub omega_2: f64,
    pub omega_c: f64,
    pub delta_1: f64,
    pub delta_2: f64,
    pub delta_c: f64,
    pub g_1c: f64,
    pub g_2c: f64,
    pub g_12: f64,
    pub dim_1: usize,
    pub dim_2: usize,
    pub dim_c: usize,
    #[serde(default = "default_cap")]
    pub dimension_cap: usize,
}

fn default_cap() -> usize {
    DEFAULT_DIMENSION_CAP
}

impl DeviceParams {
    /// The reference device: 7.15 / 7.6 / 8.5 GHz, -200 MHz qubit
    /// anharmonicities, 120 MHz qubit-coupler couplings, levels 5, 5, 4.
    pub fn paper_device() -> Self {
        Self {
            omega_1: ghz(7.15),
            omega_2: ghz(7.6),
            omega_c: ghz(8.5),
            delta_1: mhz(-200.0),
            delta_2: mhz(-200.0),
            delta_c: 0.0,
            g_1c: mhz(120.0),
            g_2c: mhz(120.0),
            g_12: 0.0,
            dim_1: 5,
            dim_2: 5,
            dim_c: 4,
            dimension_cap: DEFAULT_DIMENSION_CAP,
        }
    }

    pub fn dims(&self) -> [usize; 3] {
        [self.dim_1, self.dim_2, self.dim_c]
    }

    pub fn dimension(&self) -> usize {
        self.dim_1 * self.dim_2 * self.dim_c
    }

    pub fn frequency(&self, mode: Mode) -> f64 {
        match mode {
            Mode::Q1 => self.omega_1,
            Mode::Q2 => self.omega_2,
            Mode::Coupler => self.omega_c,
        }
    }

    pub fn anharmonicity(&self, mode: Mode) -> f64 {
        match mode {
            Mode::Q1 => self.delta_1,
            Mode::Q2 => self.delta_2,
            Mode::Coupler => self.delta_c,
        }
    }

    fn level_count(&self, mode: Mode) -> usize {
        self.dims()[mode.slot()]
    }

    pub fn validate(&self) -> Result<()> {
        for (name, d) in [("dim_1", self.dim_1), ("dim_2", self.dim_2), ("dim_c", self.dim_c)] {
            if d < 2 {
                return Err(Error::Config(format!("device.{name} must be at least 2, got {d}")));
            }
        }
        if self.dimension() > self.dimension_cap {
            return Err(Error::Config(format!(
                "tensor dimension {} exceeds the cap of {}",
                self.dimension(),
                self.dimension_cap
            )));
        }
        for (name, w) in [("omega_1", self.omega_1), ("omega_2", self.omega_2), ("omega_c", self.omega_c)] {
            if !(w.is_finite() && w > 0.0) {
                return Err(Error::Config(format!("device.{name} must be finite and positive")));
            }
        }
        for (name, v) in [
            ("delta_1", self.delta_1),
            ("delta_2", self.delta_2),
            ("delta_c", self.delta_c),
            ("g_1c", self.g_1c),
            ("g_2c", self.g_2c),
            ("g_12", self.g_12),
        ] {
            if !v.is_finite() {
                return Err(Error::Config(format!("device.{name} must be finite")));
            }
        }
        Ok(())
    }

    /// Flat index of a label, or `MissingLabel` if it is truncated away.
    pub fn index(&self, label: BasisIndex) -> Result<usize> {
        if label.fits(self.dims()) {
            Ok(label.flat(self.dims()))
        } else {
            Err(Error::MissingLabel(label.to_string()))
        }
    }

    pub fn label(&self, flat: usize) -> BasisIndex {
        BasisIndex::from_flat(flat, self.dims())
    }

    fn couplings(&self) -> [(Mode, Mode, f64); 3] {
        [(Mode::Q1, Mode::Coupler, self.g_1c), (Mode::Q2, Mode::Coupler, self.g_2c), (Mode::Q1, Mode::Q2, self.g_12)]
    }
}

/// Coupling form of the undriven Hamiltonian.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum CouplingForm {
    /// Exchange coupling only.
    #[default]
    #[serde(rename = "rwa")]
    Rwa,
    /// Full `(a^dag + a)(a^dag + a)` coupling.
    #[serde(rename = "non-rwa")]
    NonRwa,
}

/// Undriven Hamiltonian with exchange-only couplings.
pub fn build_rwa_hamiltonian(device: &DeviceParams) -> Result<DMatrix<f64>> {
    build_hamiltonian(device, CouplingForm::Rwa)
}

/// Undriven Hamiltonian including counter-rotating coupling terms.
pub fn build_non_rwa_hamiltonian(device: &DeviceParams) -> Result<DMatrix<f64>> {
    build_hamiltonian(device, CouplingForm::NonRwa)
}

pub fn build_hamiltonian(device: &DeviceParams, form: CouplingForm) -> Result<DMatrix<f64>> {
    device.validate()?;
    let dims = device.dims();
    let n = device.dimension();
    let mut h = DMatrix::<f64>::zeros(n, n);
    for s in 0..n {
        let label = BasisIndex::from_flat(s, dims);
        h[(s, s)] = Mode::ALL
            .iter()
            .map(|&m| {
                let k = label.occupation(m) as f64;
                device.frequency(m) * k + 0.5 * device.anharmonicity(m) * k * (k - 1.0)
            })
            .sum();
        for (a, b, g) in device.couplings() {
            if g == 0.0 {
                continue;
            }
            let (na, nb) = (label.occupation(a), label.occupation(b));
            // a^dag_a a_b, hermitian partner added symmetrically
            if nb > 0 && na + 1 < device.level_count(a) {
                let t = label.with(a, na + 1).with(b, nb - 1).flat(dims);
                let amp = g * (((na + 1) * nb) as f64).sqrt();
                h[(t, s)] += amp;
                h[(s, t)] += amp;
            }
            if form == CouplingForm::NonRwa && na + 1 < device.level_count(a) && nb + 1 < device.level_count(b) {
                let t = label.with(a, na + 1).with(b, nb + 1).flat(dims);
                let amp = g * (((na + 1) * (nb + 1)) as f64).sqrt();
                h[(t, s)] += amp;
                h[(s, t)] += amp;
            }
        }
    }
    Ok(h)
}

/// Diagonal of the number operator of `mode` in the bare basis.
pub fn number_diagonal(device: &DeviceParams, mode: Mode) -> Vec<f64> {
    let dims = device.dims();
    (0..device.dimension()).map(|s| BasisIndex::from_flat(s, dims).occupation(mode) as f64).collect()
}

/// Number operator of `mode` embedded in the full basis.
pub fn build_drive_generator(device: &DeviceParams, mode: Mode) -> Result<DMatrix<f64>> {
    device.validate()?;
    Ok(DMatrix::from_diagonal(&nalgebra::DVector::from_vec(number_diagonal(device, mode))))
}

/// Same as [`build_drive_generator`] with the mode given as `"1"`, `"2"` or `"c"`.
pub fn build_drive_generator_by_name(device: &DeviceParams, mode: &str) -> Result<DMatrix<f64>> {
    build_drive_generator(device, mode.parse()?)
}

/// One parametric tone `amplitude * envelope(t) * sin(frequency * t + phase)`
/// on the number operator of `mode`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriveTone {
    pub mode: Mode,
    pub amplitude: f64,
    pub frequency: f64,
    pub phase: f64,
    pub envelope: EnvelopeSpec,
}

impl DriveTone {
    /// Rectangular tone with zero phase.
    pub fn new(mode: Mode, amplitude: f64, frequency: f64) -> Self {
        Self { mode, amplitude, frequency, phase: 0.0, envelope: EnvelopeSpec::rectangular() }
    }

    pub fn with_envelope(mut self, envelope: EnvelopeSpec) -> Self {
        self.envelope = envelope;
        self
    }

    pub fn with_phase(mut self, phase: f64) -> Self {
        self.phase = phase;
        self
    }

    /// Instantaneous modulation `h(t)`.
    pub fn value(&self, t: f64) -> f64 {
        self.amplitude * self.envelope.value(t) * (self.frequency * t + self.phase).sin()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.amplitude.is_finite() && self.amplitude >= 0.0) {
            return Err(Error::Config(format!("tone on mode {}: amplitude must be >= 0", self.mode)));
        }
        if !(self.frequency.is_finite() && self.frequency > 0.0) {
            return Err(Error::Config(format!("tone on mode {}: frequency must be > 0", self.mode)));
        }
        if !self.phase.is_finite() {
            return Err(Error::Config(format!("tone on mode {}: phase must be finite", self.mode)));
        }
        self.envelope.validate()
    }
}

/// Labels of the toy basis in matrix order.
pub const TOY_LABELS: [&str; 5] = ["01", "10", "11", "02", "20"];
/// Occupation of qutrit 1 in the toy basis.
pub const TOY_N1: [f64; 5] = [0.0, 1.0, 1.0, 0.0, 2.0];
/// Occupation of qutrit 2 in the toy basis.
pub const TOY_N2: [f64; 5] = [1.0, 0.0, 1.0, 2.0, 0.0];

/// Amplitude and frequency of one toy-model tone `amplitude * sin(frequency * t)`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ToyTone {
    pub amplitude: f64,
    pub frequency: f64,
}

impl ToyTone {
    pub fn value(&self, t: f64) -> f64 {
        self.amplitude * (self.frequency * t).sin()
    }

    /// Modulation index `amplitude / frequency`.
    pub fn index(&self) -> f64 {
        if self.frequency == 0.0 {
            0.0
        } else {
            self.amplitude / self.frequency
        }
    }
}

/// Coupling `g(t) = g0 + amplitude * sin(frequency * t)` of the DC+AC variant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DcAcDrive {
    pub g0: f64,
    pub amplitude: f64,
    pub frequency: f64,
    /// Anharmonicity placed on `|20>`.
    pub delta_1: f64,
    /// Anharmonicity placed on `|02>`.
    pub delta_2: f64,
}

impl DcAcDrive {
    pub fn coupling(&self, t: f64) -> f64 {
        self.g0 + self.amplitude * (self.frequency * t).sin()
    }
}

/// Two coupled qutrits restricted to `(|01>, |10>, |11>, |02>, |20>)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToyParams {
    /// Static `|01>`-`|10>` detuning.
    pub detuning: f64,
    /// Shared anharmonicity.
    pub anharmonicity: f64,
    pub coupling: f64,
    /// Tones on qutrit 1 and qutrit 2.
    pub drives: [ToyTone; 2],
    pub dc_ac: Option<DcAcDrive>,
}

impl ToyParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.detuning.is_finite() && self.anharmonicity.is_finite() && self.coupling.is_finite()) {
            return Err(Error::Config("toy parameters must be finite".into()));
        }
        if self.coupling == 0.0 && self.dc_ac.is_none() {
            return Err(Error::Config("toy.coupling must be nonzero".into()));
        }
        for (i, d) in self.drives.iter().enumerate() {
            if d.amplitude < 0.0 || (d.amplitude > 0.0 && d.frequency <= 0.0) {
                return Err(Error::Config(format!("toy drive {} needs amplitude >= 0 and frequency > 0", i + 1)));
            }
        }
        Ok(())
    }

    /// Static energies `(0, D, D, d, 2D + d)` of the toy basis.
    pub fn static_energies(&self) -> [f64; 5] {
        let (d, a) = (self.detuning, self.anharmonicity);
        [0.0, d, d, a, 2.0 * d + a]
    }
}

fn toy_coupling_matrix(g: f64) -> DMatrix<f64> {
    let s = std::f64::consts::SQRT_2 * g;
    let mut h = DMatrix::<f64>::zeros(5, 5);
    h[(0, 1)] = g;
    h[(1, 0)] = g;
    h[(2, 3)] = s;
    h[(3, 2)] = s;
    h[(2, 4)] = s;
    h[(4, 2)] = s;
    h
}

/// Undriven toy Hamiltonian.
pub fn build_toy_static(params: &ToyParams) -> DMatrix<f64> {
    let mut h = toy_coupling_matrix(params.coupling);
    for (i, e) in params.static_energies().iter().enumerate() {
        h[(i, i)] = *e;
    }
    h
}

/// Driven toy Hamiltonian at time `t` (lab frame).
pub fn build_toy_hamiltonian(params: &ToyParams, t: f64) -> DMatrix<f64> {
    let mut h = build_toy_static(params);
    let (h1, h2) = (params.drives[0].value(t), params.drives[1].value(t));
    for i in 0..5 {
        h[(i, i)] += h1 * TOY_N1[i] + h2 * TOY_N2[i];
    }
    h
}

/// Phases `p_j(t)` of the diagonal frame `U = diag(exp(i p_j))` that removes
/// every diagonal term of the driven toy Hamiltonian.
pub fn toy_frame_phases(params: &ToyParams, t: f64) -> [f64; 5] {
    let e = params.static_energies();
    let [d1, d2] = params.drives;
    let c1 = d1.index() * (d1.frequency * t).cos();
    let c2 = d2.index() * (d2.frequency * t).cos();
    std::array::from_fn(|j| c1 * TOY_N1[j] + c2 * TOY_N2[j] - e[j] * t)
}

/// Toy Hamiltonian in the interaction picture of all diagonal terms.
pub fn build_toy_rotating_hamiltonian(params: &ToyParams, t: f64) -> DMatrix<C64> {
    let p = toy_frame_phases(params, t);
    let g = toy_coupling_matrix(params.coupling);
    DMatrix::from_fn(
        5,
        5,
        |j, k| {
            if g[(j, k)] == 0.0 {
                C64::new(0.0, 0.0)
            } else {
                C64::from_polar(g[(j, k)], p[k] - p[j])
            }
        },
    )
}

/// DC+AC toy Hamiltonian: resonant qutrits with coupling `g0 + amp sin(w t)`.
pub fn build_toy_dc_ac_hamiltonian(params: &ToyParams, t: f64) -> Result<DMatrix<f64>> {
    let drive = params.dc_ac.ok_or_else(|| Error::Config("toy model has no DC+AC drive configured".into()))?;
    let mut h = toy_coupling_matrix(drive.coupling(t));
    h[(3, 3)] = drive.delta_2;
    h[(4, 4)] = drive.delta_1;
    Ok(h)
}

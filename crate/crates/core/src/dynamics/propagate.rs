//! Piecewise-constant propagation of the driven device.
//!
//! The undriven Hamiltonian splits into invariant blocks (excitation
//! manifolds for exchange coupling, parity sectors otherwise). Drives are
//! diagonal in the bare basis, so every block evolves independently and only
//! blocks touched by the initial states are propagated.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::model::{number_diagonal, BasisIndex, DeviceParams, DriveTone, Mode};
use crate::numerics::linalg::{connected_components, expm_hermitian, expm_symmetric};
use crate::numerics::C64;
use crate::spectrum::DressedFrame;
use crate::{Error, Result};

/// Step rule for one time slice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Integrator {
    /// `exp(-i D dt/2) exp(-i H0 dt) exp(-i D dt/2)`, D evaluated at the
    /// slice midpoint.
    #[default]
    Split,
    /// `exp(-i H(t_mid) dt)` by eigendecomposition.
    Expm,
}

impl std::str::FromStr for Integrator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "split" => Ok(Integrator::Split),
            "expm" => Ok(Integrator::Expm),
            other => Err(Error::Config(format!("unknown integrator `{other}` (expected split or expm)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropagationOptions {
    /// Time step in ns; [`default_dt`] when `None`.
    pub dt: Option<f64>,
    pub integrator: Integrator,
    /// Number of trace intervals recorded over the evolution.
    pub samples: usize,
    /// Largest tolerated norm / overlap drift.
    pub drift_tolerance: f64,
}

impl Default for PropagationOptions {
    fn default() -> Self {
        Self { dt: None, integrator: Integrator::Split, samples: 200, drift_tolerance: 1e-6 }
    }
}

/// `min(1e-3 ns, 1 / (40 f_max))` with `f_max` the highest bare mode
/// frequency in GHz.
pub fn default_dt(device: &DeviceParams) -> f64 {
    let f_max = Mode::ALL.iter().map(|&m| device.frequency(m)).fold(0.0, f64::max) / (2.0 * std::f64::consts::PI);
    (1.0 / (40.0 * f_max)).min(1e-3)
}

/// One initial state.
#[derive(Debug, Clone, PartialEq)]
pub struct Input {
    pub label: String,
    pub state: DVector<C64>,
}

impl Input {
    pub fn new(label: impl Into<String>, state: DVector<C64>) -> Self {
        Self { label: label.into(), state }
    }

    /// Dressed eigenstate labeled `label`.
    pub fn dressed(frame: &DressedFrame, label: BasisIndex) -> Result<Self> {
        let v = frame.dressed_state(label)?;
        Ok(Self { label: label.to_string(), state: v.map(|x| C64::new(x, 0.0)) })
    }

    /// Bare basis state `label`.
    pub fn bare(device: &DeviceParams, label: BasisIndex) -> Result<Self> {
        let mut v = DVector::zeros(device.dimension());
        v[device.index(label)?] = C64::new(1.0, 0.0);
        Ok(Self { label: label.to_string(), state: v })
    }
}

/// Real state whose population is recorded.
#[derive(Debug, Clone, PartialEq)]
pub struct Tracked {
    pub label: String,
    pub state: DVector<f64>,
}

impl Tracked {
    pub fn dressed(frame: &DressedFrame, label: BasisIndex) -> Result<Self> {
        Ok(Self { label: label.to_string(), state: frame.dressed_state(label)? })
    }
}

#[derive(Debug, Clone)]
struct Block {
    members: Vec<usize>,
    h0: DMatrix<f64>,
    energies: Vec<f64>,
    vectors: DMatrix<f64>,
}

/// Undriven dynamics split into invariant blocks, with the drive generators.
#[derive(Debug, Clone)]
pub struct Propagator {
    dim: usize,
    numbers: [Vec<f64>; 3],
    blocks: Vec<Block>,
    block_of: Vec<usize>,
    default_dt: f64,
}

/// Outcome of one propagation.
#[derive(Debug, Clone)]
pub struct PropagationResult {
    pub input_labels: Vec<String>,
    /// Initial states as columns.
    pub initial: DMatrix<C64>,
    /// `U(t_g)` applied to each initial state. Equals the full propagator
    /// when the inputs are the identity columns.
    pub final_states: DMatrix<C64>,
    pub time_grid: Vec<f64>,
    pub tracked_labels: Vec<String>,
    /// `traces[input][tracked][sample]`.
    pub traces: Vec<Vec<Vec<f64>>>,
    /// Largest deviation of the state overlaps from their initial values.
    pub max_drift: f64,
    pub dt: f64,
    pub steps: usize,
}

impl PropagationResult {
    pub fn input_index(&self, label: &str) -> Option<usize> {
        self.input_labels.iter().position(|l| l == label)
    }

    pub fn trace(&self, input: &str, tracked: &str) -> Option<&[f64]> {
        let i = self.input_index(input)?;
        let j = self.tracked_labels.iter().position(|l| l == tracked)?;
        Some(&self.traces[i][j])
    }
}

impl Propagator {
    /// Diagonalizes `h0` block by block.
    pub fn new(h0: &DMatrix<f64>, device: &DeviceParams) -> Result<Self> {
        device.validate()?;
        let n = device.dimension();
        if h0.nrows() != n || h0.ncols() != n {
            return Err(Error::Config("Hamiltonian does not match the device dimension".into()));
        }
        let groups = connected_components(n, |i, j| h0[(i, j)] != 0.0);
        let blocks = groups
            .into_iter()
            .map(|members| {
                let sub = DMatrix::from_fn(members.len(), members.len(), |i, j| h0[(members[i], members[j])]);
                let eig = SymmetricEigen::new(sub.clone());
                Block {
                    members,
                    h0: sub,
                    energies: eig.eigenvalues.iter().copied().collect(),
                    vectors: eig.eigenvectors,
                }
            })
            .collect();
        Ok(Self::assemble(device, blocks))
    }

    /// Reuses the eigendecomposition of a dressed frame built from `h0`.
    pub fn from_frame(h0: &DMatrix<f64>, frame: &DressedFrame) -> Result<Self> {
        let device = frame.device();
        if h0.nrows() != device.dimension() {
            return Err(Error::Config("Hamiltonian does not match the frame".into()));
        }
        let blocks = frame
            .blocks
            .iter()
            .map(|members| {
                let m = members.len();
                Block {
                    members: members.clone(),
                    h0: DMatrix::from_fn(m, m, |i, j| h0[(members[i], members[j])]),
                    energies: members.iter().map(|&i| frame.energies[i]).collect(),
                    vectors: DMatrix::from_fn(m, m, |i, j| frame.eigenvectors[(members[i], members[j])]),
                }
            })
            .collect();
        Ok(Self::assemble(device, blocks))
    }

    fn assemble(device: &DeviceParams, blocks: Vec<Block>) -> Self {
        let n = device.dimension();
        let mut block_of = vec![0; n];
        for (b, blk) in blocks.iter().enumerate() {
            for &i in &blk.members {
                block_of[i] = b;
            }
        }
        Self {
            dim: n,
            numbers: Mode::ALL.map(|m| number_diagonal(device, m)),
            blocks,
            block_of,
            default_dt: default_dt(device),
        }
    }

    pub fn dimension(&self) -> usize {
        self.dim
    }

    pub fn default_dt(&self) -> f64 {
        self.default_dt
    }

    /// Propagates `inputs` under `tones` over `[0, gate_time]`.
    pub fn propagate(
        &self,
        tones: &[DriveTone],
        gate_time: f64,
        inputs: &[Input],
        tracked: &[Tracked],
        opts: &PropagationOptions,
    ) -> Result<PropagationResult> {
        if gate_time.is_nan() || gate_time <= 0.0 {
            return Err(Error::Config("gate time must be positive".into()));
        }
        for t in tones {
            t.validate()?;
        }
        let dt_req = opts.dt.unwrap_or(self.default_dt);
        if dt_req.is_nan() || dt_req <= 0.0 {
            return Err(Error::Config("dt must be positive".into()));
        }
        let steps = (gate_time / dt_req - 1e-9).ceil().max(1.0) as usize;
        let dt = gate_time / steps as f64;
        let stride = (steps / opts.samples.max(1)).max(1);
        let mut sample_steps: Vec<usize> = (0..=steps).step_by(stride).collect();
        if *sample_steps.last().expect("nonempty") != steps {
            sample_steps.push(steps);
        }
        let time_grid: Vec<f64> = sample_steps.iter().map(|&k| k as f64 * dt).collect();

        let k = inputs.len();
        let initial = DMatrix::from_fn(self.dim, k, |i, c| inputs[c].state[i]);
        let mut final_states = DMatrix::<C64>::zeros(self.dim, k);
        let mut traces = vec![vec![vec![0.0; time_grid.len()]; tracked.len()]; k];
        let mut norms = vec![vec![0.0; k]; time_grid.len()];

        let tracked_block: Vec<Option<usize>> = tracked
            .iter()
            .map(|t| {
                let support: Vec<usize> = (0..self.dim).filter(|&i| t.state[i] != 0.0).collect();
                let b = self.block_of[*support.first()?];
                support.iter().all(|&i| self.block_of[i] == b).then_some(b)
            })
            .collect();
        if let Some(pos) = tracked_block.iter().position(Option::is_none) {
            return Err(Error::Config(format!("tracked state {} spans several invariant blocks", tracked[pos].label)));
        }

        for (b, block) in self.blocks.iter().enumerate() {
            let m = block.members.len();
            let psi0 = DMatrix::from_fn(m, k, |i, c| initial[(block.members[i], c)]);
            if psi0.iter().all(|z| z.norm_sqr() == 0.0) {
                continue;
            }
            let local_tracked: Vec<(usize, DVector<C64>)> = tracked_block
                .iter()
                .enumerate()
                .filter(|(_, tb)| **tb == Some(b))
                .map(|(j, _)| (j, DVector::from_fn(m, |i, _| C64::new(tracked[j].state[block.members[i]], 0.0))))
                .collect();
            let generators: Vec<Vec<f64>> =
                tones.iter().map(|t| block.members.iter().map(|&i| self.numbers[t.mode.slot()][i]).collect()).collect();

            let mut record = |sample: usize, psi: &DMatrix<C64>| {
                for c in 0..k {
                    let col = psi.column(c);
                    norms[sample][c] += col.norm_squared();
                    for (j, v) in &local_tracked {
                        traces[c][*j][sample] = v.dotc(&col).norm_sqr();
                    }
                }
            };

            if tones.iter().all(|t| t.amplitude == 0.0) {
                // static Hamiltonian: evaluate the spectral form at each sample
                let v = block.vectors.map(|x| C64::new(x, 0.0));
                let rotated = v.transpose() * &psi0;
                let mut psi = psi0;
                for (s, &t) in time_grid.iter().enumerate() {
                    let mut evolved = rotated.clone();
                    for (j, &e) in block.energies.iter().enumerate() {
                        let p = C64::from_polar(1.0, -e * t);
                        evolved.row_mut(j).iter_mut().for_each(|z| *z *= p);
                    }
                    psi = &v * evolved;
                    record(s, &psi);
                }
                for c in 0..k {
                    for i in 0..m {
                        final_states[(block.members[i], c)] = psi[(i, c)];
                    }
                }
                continue;
            }

            let mut psi = psi0;
            record(0, &psi);
            let mut next_sample = 1;
            let mut diag = vec![0.0; m];
            let free = match opts.integrator {
                Integrator::Split => {
                    let v = block.vectors.map(|x| C64::new(x, 0.0));
                    let mut scaled = v.clone();
                    for (j, &e) in block.energies.iter().enumerate() {
                        let p = C64::from_polar(1.0, -e * dt);
                        for i in 0..m {
                            scaled[(i, j)] *= p;
                        }
                    }
                    Some(scaled * v.transpose())
                }
                Integrator::Expm => None,
            };
            let mut scratch = DMatrix::<C64>::zeros(m, k);
            for step in 0..steps {
                let t_mid = (step as f64 + 0.5) * dt;
                diag.iter_mut().for_each(|d| *d = 0.0);
                for (tone, gen) in tones.iter().zip(&generators) {
                    let h = tone.value(t_mid);
                    if h != 0.0 {
                        for (d, n) in diag.iter_mut().zip(gen) {
                            *d += h * n;
                        }
                    }
                }
                match &free {
                    Some(p) => {
                        let half: Vec<C64> = diag.iter().map(|d| C64::from_polar(1.0, -0.5 * d * dt)).collect();
                        for c in 0..k {
                            for i in 0..m {
                                psi[(i, c)] *= half[i];
                            }
                        }
                        p.mul_to(&psi, &mut scratch);
                        for c in 0..k {
                            for i in 0..m {
                                psi[(i, c)] = scratch[(i, c)] * half[i];
                            }
                        }
                    }
                    None => {
                        let mut h = block.h0.clone();
                        for (i, d) in diag.iter().enumerate() {
                            h[(i, i)] += d;
                        }
                        expm_symmetric(&h, dt).mul_to(&psi, &mut scratch);
                        std::mem::swap(&mut psi, &mut scratch);
                    }
                }
                if next_sample < sample_steps.len() && sample_steps[next_sample] == step + 1 {
                    record(next_sample, &psi);
                    next_sample += 1;
                }
            }
            for c in 0..k {
                for i in 0..m {
                    final_states[(block.members[i], c)] = psi[(i, c)];
                }
            }
        }

        let mut max_drift: f64 = 0.0;
        for row in norms.iter().skip(1) {
            for c in 0..k {
                max_drift = max_drift.max((row[c] - norms[0][c]).abs());
            }
        }
        let gram_0 = initial.adjoint() * &initial;
        let gram_t = final_states.adjoint() * &final_states;
        max_drift = max_drift.max((gram_t - gram_0).iter().map(|z| z.norm()).fold(0.0, f64::max));
        if max_drift > opts.drift_tolerance {
            return Err(Error::Integration { drift: max_drift, suggested_dt: dt / 4.0 });
        }

        Ok(PropagationResult {
            input_labels: inputs.iter().map(|i| i.label.clone()).collect(),
            initial,
            final_states,
            time_grid,
            tracked_labels: tracked.iter().map(|t| t.label.clone()).collect(),
            traces,
            max_drift,
            dt,
            steps,
        })
    }

    /// Full propagator `U(t_g)` (all basis columns).
    pub fn unitary(&self, tones: &[DriveTone], gate_time: f64, opts: &PropagationOptions) -> Result<DMatrix<C64>> {
        let inputs: Vec<Input> = (0..self.dim)
            .map(|i| {
                let mut v = DVector::zeros(self.dim);
                v[i] = C64::new(1.0, 0.0);
                Input::new(i.to_string(), v)
            })
            .collect();
        let opts = PropagationOptions { samples: 1, ..*opts };
        Ok(self.propagate(tones, gate_time, &inputs, &[], &opts)?.final_states)
    }
}

/// Average population leaving the computational subspace
/// `{000, 010, 100, 110}` for the dressed inputs `010`, `100`, `110`.
pub fn leakage(result: &PropagationResult, frame: &DressedFrame) -> Result<f64> {
    let comp: Vec<DVector<C64>> = ["000", "010", "100", "110"]
        .iter()
        .map(|s| frame.dressed_state(s.parse().expect("static")).map(|v| v.map(|x| C64::new(x, 0.0))))
        .collect::<Result<_>>()?;
    let mut total = 0.0;
    for label in ["010", "100", "110"] {
        let c = result.input_index(label).ok_or_else(|| Error::MissingLabel(label.to_string()))?;
        let psi = result.final_states.column(c);
        let kept: f64 = comp.iter().map(|v| v.dotc(&psi).norm_sqr()).sum();
        total += 1.0 - kept;
    }
    Ok(total / 3.0)
}

/// Samples recorded by [`propagate_generic`].
#[derive(Debug, Clone)]
pub struct GenericEvolution {
    pub time_grid: Vec<f64>,
    pub states: Vec<DMatrix<C64>>,
}

impl GenericEvolution {
    pub fn final_state(&self) -> &DMatrix<C64> {
        self.states.last().expect("nonempty")
    }

    /// `|<e_row | psi_col(t)>|^2` over the time grid.
    pub fn population(&self, row: usize, col: usize) -> Vec<f64> {
        self.states.iter().map(|s| s[(row, col)].norm_sqr()).collect()
    }
}

/// Propagates columns of `psi0` under a general Hermitian `h(t)` with the
/// fourth-order two-point Magnus step.
pub fn propagate_generic<F: Fn(f64) -> DMatrix<C64>>(
    h: F,
    t_start: f64,
    t_end: f64,
    steps: usize,
    psi0: &DMatrix<C64>,
    samples: usize,
) -> GenericEvolution {
    let steps = steps.max(1);
    let dt = (t_end - t_start) / steps as f64;
    let stride = (steps / samples.max(1)).max(1);
    let c = 3f64.sqrt() / 6.0;
    let mut psi = psi0.clone();
    let mut time_grid = vec![t_start];
    let mut states = vec![psi.clone()];
    for step in 0..steps {
        let t0 = t_start + step as f64 * dt;
        let h1 = h(t0 + (0.5 - c) * dt);
        let h2 = h(t0 + (0.5 + c) * dt);
        let comm = &h2 * &h1 - &h1 * &h2;
        let h_eff = (&h1 + &h2) * C64::new(0.5, 0.0) + comm * C64::new(0.0, -(3f64.sqrt()) * dt / 12.0);
        psi = expm_hermitian(&h_eff, dt) * psi;
        if (step + 1) % stride == 0 || step + 1 == steps {
            time_grid.push(t0 + dt);
            states.push(psi.clone());
        }
    }
    GenericEvolution { time_grid, states }
}

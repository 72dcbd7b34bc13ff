//! Dressed states of the undriven Hamiltonian.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::Serialize;

use crate::model::{number_diagonal, BasisIndex, DeviceParams, Mode};
use crate::numerics::linalg::connected_components;
use crate::{Error, Result};

/// Overlap below which a dressed label is reported as ambiguous.
pub const AMBIGUOUS_OVERLAP: f64 = 0.5;

/// Eigen-decomposition of the undriven Hamiltonian, indexed by bare label.
///
/// Column `j` of `eigenvectors` is the dressed state whose dominant bare
/// component is the basis state with flat index `j`; `energies[j]` is its
/// eigenfrequency. Each column is gauged so that its largest-magnitude
/// component is positive.
#[derive(Debug, Clone)]
pub struct DressedFrame {
    device: DeviceParams,
    pub energies: Vec<f64>,
    pub eigenvectors: DMatrix<f64>,
    /// `|<bare j | dressed j>|^2`.
    pub overlaps: Vec<f64>,
    /// Invariant subspaces of the undriven Hamiltonian (bare flat indices).
    pub blocks: Vec<Vec<usize>>,
    pub block_of: Vec<usize>,
    /// Diagonal of `U0^T n_m U0` for modes `[1, 2, c]`.
    pub n_coeffs: [Vec<f64>; 3],
    /// Off-diagonal part of `U0^T n_m U0` (zero diagonal).
    pub c_coeffs: [DMatrix<f64>; 3],
    pub warnings: Vec<String>,
}

/// Diagonalizes `h0` block by block and labels dressed states by greedy
/// maximum overlap.
pub fn diagonalize(h0: &DMatrix<f64>, device: &DeviceParams) -> Result<DressedFrame> {
    device.validate()?;
    let n = device.dimension();
    if h0.nrows() != n || h0.ncols() != n {
        return Err(Error::Config(format!("Hamiltonian is {}x{}, device needs {n}x{n}", h0.nrows(), h0.ncols())));
    }
    let asym = (h0 - h0.transpose()).norm() / h0.norm().max(f64::MIN_POSITIVE);
    if asym > 1e-12 {
        return Err(Error::Config(format!("Hamiltonian is not symmetric (defect {asym:.2e})")));
    }

    let blocks = connected_components(n, |i, j| h0[(i, j)] != 0.0);
    let mut block_of = vec![0; n];
    let mut energies = vec![0.0; n];
    let mut overlaps = vec![0.0; n];
    let mut eigenvectors = DMatrix::<f64>::zeros(n, n);
    let mut warnings = Vec::new();

    for (b, members) in blocks.iter().enumerate() {
        let m = members.len();
        for &i in members {
            block_of[i] = b;
        }
        let sub = DMatrix::from_fn(m, m, |i, j| h0[(members[i], members[j])]);
        let eig = SymmetricEigen::new(sub);
        let mut candidates: Vec<(f64, usize, usize)> = Vec::with_capacity(m * m);
        for i in 0..m {
            for k in 0..m {
                candidates.push((eig.eigenvectors[(i, k)].powi(2), i, k));
            }
        }
        candidates.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
        let mut bare_taken = vec![false; m];
        let mut eig_taken = vec![false; m];
        for (ov, i, k) in candidates {
            if bare_taken[i] || eig_taken[k] {
                continue;
            }
            bare_taken[i] = true;
            eig_taken[k] = true;
            let col = members[i];
            energies[col] = eig.eigenvalues[k];
            overlaps[col] = ov;
            let v = eig.eigenvectors.column(k);
            let pivot = (0..m).fold(0, |best, r| if v[r].abs() > v[best].abs() + 1e-14 { r } else { best });
            let sign = if v[pivot] < 0.0 { -1.0 } else { 1.0 };
            for r in 0..m {
                eigenvectors[(members[r], col)] = sign * v[r];
            }
            if ov < AMBIGUOUS_OVERLAP {
                warnings.push(format!("dressed state {} has best bare overlap {ov:.3}", device.label(col)));
            }
        }
    }

    let mut n_coeffs: [Vec<f64>; 3] = Default::default();
    let mut c_coeffs: [DMatrix<f64>; 3] = Default::default();
    for mode in Mode::ALL {
        let occ = DVector::from_vec(number_diagonal(device, mode));
        let mut weighted = eigenvectors.clone();
        for (r, mut row) in weighted.row_iter_mut().enumerate() {
            row *= occ[r];
        }
        let mut full = eigenvectors.transpose() * weighted;
        let diag: Vec<f64> = full.diagonal().iter().copied().collect();
        full.fill_diagonal(0.0);
        n_coeffs[mode.slot()] = diag;
        c_coeffs[mode.slot()] = full;
    }

    Ok(DressedFrame {
        device: device.clone(),
        energies,
        eigenvectors,
        overlaps,
        blocks,
        block_of,
        n_coeffs,
        c_coeffs,
        warnings,
    })
}

impl DressedFrame {
    pub fn device(&self) -> &DeviceParams {
        &self.device
    }

    pub fn dimension(&self) -> usize {
        self.energies.len()
    }

    pub fn index(&self, label: BasisIndex) -> Result<usize> {
        self.device.index(label)
    }

    pub fn label(&self, flat: usize) -> BasisIndex {
        self.device.label(flat)
    }

    pub fn energy(&self, label: BasisIndex) -> Result<f64> {
        Ok(self.energies[self.index(label)?])
    }

    /// `N^m` of a dressed state.
    pub fn n_coeff(&self, mode: Mode, label: BasisIndex) -> Result<f64> {
        Ok(self.n_coeffs[mode.slot()][self.index(label)?])
    }

    /// `C^m_{a,b}`.
    pub fn c_coeff(&self, mode: Mode, a: BasisIndex, b: BasisIndex) -> Result<f64> {
        Ok(self.c_coeffs[mode.slot()][(self.index(a)?, self.index(b)?)])
    }

    /// Dressed state labeled by `label`, in the bare basis.
    pub fn dressed_state(&self, label: BasisIndex) -> Result<DVector<f64>> {
        Ok(self.eigenvectors.column(self.index(label)?).into_owned())
    }

    /// Full `U0^T n_m U0`.
    pub fn transformed_number(&self, mode: Mode) -> DMatrix<f64> {
        let mut m = self.c_coeffs[mode.slot()].clone();
        for (i, v) in self.n_coeffs[mode.slot()].iter().enumerate() {
            m[(i, i)] = *v;
        }
        m
    }

    /// True when the dressed states share an invariant block.
    pub fn same_block(&self, a: usize, b: usize) -> bool {
        self.block_of[a] == self.block_of[b]
    }
}

/// `w~_a - w~_b`.
pub fn detuning(frame: &DressedFrame, a: BasisIndex, b: BasisIndex) -> Result<f64> {
    Ok(frame.energy(a)? - frame.energy(b)?)
}

/// Static ZZ strength `E_110 + E_000 - E_100 - E_010`.
pub fn zz_strength(frame: &DressedFrame) -> Result<f64> {
    let e = |s: &str| frame.energy(s.parse().expect("static label"));
    Ok(e("110")? + e("000")? - e("100")? - e("010")?)
}

/// Drive-coupling constants of one transition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CouplingConstants {
    #[serde(serialize_with = "ser_pair")]
    pub transition: (BasisIndex, BasisIndex),
    pub drive_mode: Mode,
    pub spectator_mode: Mode,
    /// `C^{drive}_{a,b} / 2`.
    pub alpha: f64,
    /// `N^{drive}_a - N^{drive}_b`.
    pub beta: f64,
    /// `N^{spectator}_a - N^{spectator}_b`.
    pub gamma: f64,
}

fn ser_pair<S: serde::Serializer>(p: &(BasisIndex, BasisIndex), s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq([p.0.to_string(), p.1.to_string()])
}

/// Constants of `transition = (a, b)` resonantly driven through
/// `drive_mode`, with `spectator_mode` carrying the other tone.
pub fn coupling_constants(
    frame: &DressedFrame,
    transition: (BasisIndex, BasisIndex),
    drive_mode: Mode,
    spectator_mode: Mode,
) -> Result<CouplingConstants> {
    let (a, b) = transition;
    Ok(CouplingConstants {
        transition,
        drive_mode,
        spectator_mode,
        alpha: frame.c_coeff(drive_mode, a, b)? / 2.0,
        beta: frame.n_coeff(drive_mode, a)? - frame.n_coeff(drive_mode, b)?,
        gamma: frame.n_coeff(spectator_mode, a)? - frame.n_coeff(spectator_mode, b)?,
    })
}

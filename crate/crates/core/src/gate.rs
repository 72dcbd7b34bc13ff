//! Computational-subspace projection, fSim angle extraction and fidelity.

use std::f64::consts::PI;

use nalgebra::Matrix4;
use serde::Serialize;

use crate::dynamics::propagate::{leakage, PropagationResult};
use crate::model::BasisIndex;
use crate::numerics::{wrap_phase, C64};
use crate::spectrum::DressedFrame;
use crate::{Error, Result};

/// Computational labels in matrix order.
pub const COMPUTATIONAL: [&str; 4] = ["000", "010", "100", "110"];

/// Below this `Tr(M M^dag)` the extraction is refused.
pub const MIN_SUBSPACE_NORM: f64 = 3.5;

/// Switch to the off-diagonal phase formula when `|cos theta|` drops below this.
pub const COS_THRESHOLD: f64 = 0.1;

pub fn computational_labels() -> [BasisIndex; 4] {
    COMPUTATIONAL.map(|s| s.parse().expect("static label"))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComputationalUnitary {
    pub matrix: Matrix4<C64>,
    /// `Tr(M M^dag)`.
    pub subspace_norm: f64,
}

impl ComputationalUnitary {
    pub fn new(matrix: Matrix4<C64>) -> Self {
        let subspace_norm = (matrix * matrix.adjoint()).trace().re;
        Self { matrix, subspace_norm }
    }
}

/// `M_ij = <d_i| U |d_j>` from a propagation whose inputs include the four
/// dressed computational states.
pub fn project(result: &PropagationResult, frame: &DressedFrame) -> Result<ComputationalUnitary> {
    let states = dressed_columns(frame)?;
    let mut m = Matrix4::zeros();
    for (j, label) in COMPUTATIONAL.iter().enumerate() {
        let col = result.input_index(label).ok_or_else(|| Error::MissingLabel((*label).to_string()))?;
        let psi = result.final_states.column(col);
        for (i, d) in states.iter().enumerate() {
            m[(i, j)] = dot_real(d, psi.iter());
        }
    }
    Ok(ComputationalUnitary::new(m))
}

/// Same projection from a full propagator in the bare basis.
pub fn project_unitary(u: &nalgebra::DMatrix<C64>, frame: &DressedFrame) -> Result<ComputationalUnitary> {
    let states = dressed_columns(frame)?;
    let mut m = Matrix4::zeros();
    for (j, dj) in states.iter().enumerate() {
        let psi: Vec<C64> = (0..u.nrows()).map(|r| dj.iter().enumerate().map(|(k, &x)| u[(r, k)] * x).sum()).collect();
        for (i, di) in states.iter().enumerate() {
            m[(i, j)] = dot_real(di, psi.iter());
        }
    }
    Ok(ComputationalUnitary::new(m))
}

fn dressed_columns(frame: &DressedFrame) -> Result<Vec<Vec<f64>>> {
    computational_labels().iter().map(|&l| frame.dressed_state(l).map(|v| v.iter().copied().collect())).collect()
}

fn dot_real<'a>(d: &[f64], psi: impl Iterator<Item = &'a C64>) -> C64 {
    d.iter().zip(psi).map(|(&x, &z)| z * x).sum()
}

/// The fSim matrix with `exp(i phi)` on `|11>`.
pub fn ideal_fsim(theta: f64, phi: f64) -> Matrix4<C64> {
    let c = C64::new(theta.cos(), 0.0);
    let s = C64::new(0.0, -theta.sin());
    let z = C64::new(0.0, 0.0);
    let one = C64::new(1.0, 0.0);
    Matrix4::new(one, z, z, z, z, c, s, z, z, s, c, z, z, z, z, C64::from_polar(1.0, phi))
}

/// Extracted gate with the local Z frame removed.
#[derive(Debug, Clone, PartialEq)]
pub struct Extraction {
    pub theta: f64,
    pub phi: f64,
    /// `[a, b, c, d]`: input phases `diag(1, e^{ia}, e^{ib}, e^{i(a+b)})`
    /// and output phases `diag(1, e^{ic}, e^{id}, e^{i(c+d)})`, after a
    /// global phase fixing `M_00` real.
    pub single_qubit_phases: [f64; 4],
    /// `M` with the local frame and global phase removed.
    pub corrected: Matrix4<C64>,
}

pub fn extract_angles(m: &ComputationalUnitary) -> Result<Extraction> {
    if m.subspace_norm.is_nan() || m.subspace_norm <= MIN_SUBSPACE_NORM {
        return Err(Error::ExtractionUnreliable(m.subspace_norm));
    }
    let x = &m.matrix;
    let mu = |i: usize, j: usize| x[(i, j)].arg();
    let theta = x[(1, 2)].norm().clamp(0.0, 1.0).asin();
    let g = -mu(0, 0);
    let half = PI / 2.0;
    let (b, c, d, phi) = if theta.cos().abs() > COS_THRESHOLD {
        let c = -mu(1, 1) - g;
        let b = -half - mu(1, 2) - g - c;
        let d = -mu(2, 2) - g - b;
        (b, c, d, mu(3, 3) + mu(0, 0) - mu(1, 1) - mu(2, 2))
    } else {
        let d = -half - mu(2, 1) - g;
        let b = -mu(2, 2) - g - d;
        let c = -half - mu(1, 2) - g - b;
        (b, c, d, mu(3, 3) + mu(0, 0) - mu(1, 2) - mu(2, 1) - PI)
    };
    let a = 0.0;
    let pre = [0.0, a, b, a + b];
    let post = [0.0, c, d, c + d];
    let corrected = Matrix4::from_fn(|i, j| x[(i, j)] * C64::from_polar(1.0, g + post[i] + pre[j]));
    Ok(Extraction { theta, phi: wrap_phase(phi), single_qubit_phases: [a, b, c, d].map(wrap_phase), corrected })
}

/// `(Tr(M M^dag) + |Tr M|^2) / 20` with `M = target^dag m`.
pub fn fidelity(m: &Matrix4<C64>, target: &Matrix4<C64>) -> f64 {
    let k = target.adjoint() * m;
    let norm = (k * k.adjoint()).trace().re;
    ((norm + k.trace().norm_sqr()) / 20.0).clamp(0.0, 1.0)
}

/// Comparison against analytic angles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PredictedComparison {
    pub theta: f64,
    pub phi: f64,
    pub fidelity: f64,
    pub delta_theta: f64,
    /// Wrapped `phi_numeric - phi_predicted`.
    pub delta_phi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GateReport {
    pub theta: f64,
    /// Conditional phase including the static ZZ phase `-xi_zz t_g`.
    pub phi: f64,
    /// Conditional phase with every dressed free phase `e^{-i w~ t_g}`
    /// divided out, `phi + xi_zz t_g`.
    pub phi_rotating: f64,
    pub leakage: f64,
    pub fidelity: f64,
    pub subspace_norm: f64,
    pub single_qubit_phases: [f64; 4],
    pub predicted: Option<PredictedComparison>,
}

/// Report for a propagation over `gate_time`, optionally against analytic
/// `(theta, phi)`.
pub fn gate_report(
    result: &PropagationResult,
    frame: &DressedFrame,
    gate_time: f64,
    predicted: Option<(f64, f64)>,
) -> Result<GateReport> {
    let m = project(result, frame)?;
    let ex = extract_angles(&m)?;
    let xi = crate::spectrum::zz_strength(frame)?;
    let leak = leakage(result, frame)?;
    let predicted = predicted.map(|(theta, phi)| PredictedComparison {
        theta,
        phi,
        fidelity: fidelity(&ex.corrected, &ideal_fsim(theta, phi)),
        delta_theta: ex.theta - theta,
        delta_phi: wrap_phase(ex.phi - phi),
    });
    Ok(GateReport {
        theta: ex.theta,
        phi: ex.phi,
        phi_rotating: wrap_phase(ex.phi + xi * gate_time),
        leakage: leak,
        fidelity: fidelity(&ex.corrected, &ideal_fsim(ex.theta, ex.phi)),
        subspace_norm: m.subspace_norm,
        single_qubit_phases: ex.single_qubit_phases,
        predicted,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_and_iswap_cz() {
        assert_eq!(ideal_fsim(0.0, 0.0), Matrix4::identity());
        let m = ideal_fsim(PI / 2.0, PI);
        assert!((m[(1, 2)] - C64::new(0.0, -1.0)).norm() < 1e-15);
        assert!((m[(2, 1)] - C64::new(0.0, -1.0)).norm() < 1e-15);
        assert!(m[(1, 1)].norm() < 1e-15);
        assert!((m[(3, 3)] + 1.0).norm() < 1e-15);
    }

    #[test]
    fn fidelity_limits() {
        let t = ideal_fsim(0.4, 1.1);
        assert!((fidelity(&t, &t) - 1.0).abs() < 1e-14);
        assert_eq!(fidelity(&Matrix4::zeros(), &t), 0.0);
    }

    #[test]
    fn low_norm_is_refused() {
        let mut m = Matrix4::<C64>::identity();
        m[(3, 3)] = C64::new(0.0, 0.0);
        assert!(matches!(extract_angles(&ComputationalUnitary::new(m)), Err(Error::ExtractionUnreliable(_))));
    }

    #[test]
    fn dual_branch_round_trip() {
        for &(theta, phi) in &[(PI / 2.0, 0.3), (1.5, -2.0), (0.2, 3.0), (0.0, -1.0)] {
            let ex = extract_angles(&ComputationalUnitary::new(ideal_fsim(theta, phi))).unwrap();
            assert!((ex.theta - theta).abs() < 1e-12);
            assert!(wrap_phase(ex.phi - phi).abs() < 1e-12);
        }
    }
}

//! Dense helpers built on nalgebra.

use nalgebra::{Complex, DMatrix, SymmetricEigen};
use std::f64::consts::PI;

pub type C64 = Complex<f64>;

/// Wraps an angle to `[-pi, pi)`.
pub fn wrap_phase(x: f64) -> f64 {
    let w = (x + PI).rem_euclid(2.0 * PI) - PI;
    if w >= PI {
        -PI
    } else {
        w
    }
}

/// Connected components of the graph on `0..n` with an edge wherever
/// `linked(i, j)` holds for `i < j`. Components are sorted by their smallest
/// member and each component is sorted ascending.
pub fn connected_components<F: Fn(usize, usize) -> bool>(n: usize, linked: F) -> Vec<Vec<usize>> {
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if linked(i, j) {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                if ri != rj {
                    parent[ri.max(rj)] = ri.min(rj);
                }
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut slot = vec![usize::MAX; n];
    for i in 0..n {
        let root = find(&mut parent, i);
        if slot[root] == usize::MAX {
            slot[root] = groups.len();
            groups.push(Vec::new());
        }
        groups[slot[root]].push(i);
    }
    groups
}

/// `exp(-i h tau)` for a real symmetric `h`.
pub fn expm_symmetric(h: &DMatrix<f64>, tau: f64) -> DMatrix<C64> {
    let eig = SymmetricEigen::new(h.clone());
    let v = eig.eigenvectors.map(|x| C64::new(x, 0.0));
    let phases: Vec<C64> = eig.eigenvalues.iter().map(|&e| C64::from_polar(1.0, -e * tau)).collect();
    let mut scaled = v.clone();
    for (j, p) in phases.iter().enumerate() {
        for i in 0..scaled.nrows() {
            scaled[(i, j)] *= p;
        }
    }
    scaled * v.transpose()
}

/// `exp(-i h tau)` for a complex Hermitian `h`.
pub fn expm_hermitian(h: &DMatrix<C64>, tau: f64) -> DMatrix<C64> {
    if h.nrows() == 2 {
        return expm_hermitian_2x2(h, tau);
    }
    let eig = SymmetricEigen::new(h.clone());
    let v = eig.eigenvectors;
    let mut scaled = v.clone();
    for (j, &e) in eig.eigenvalues.iter().enumerate() {
        let p = C64::from_polar(1.0, -e * tau);
        for i in 0..scaled.nrows() {
            scaled[(i, j)] *= p;
        }
    }
    scaled * v.adjoint()
}

fn expm_hermitian_2x2(h: &DMatrix<C64>, tau: f64) -> DMatrix<C64> {
    // h = a I + bx X + by Y + bz Z
    let a = 0.5 * (h[(0, 0)].re + h[(1, 1)].re);
    let bz = 0.5 * (h[(0, 0)].re - h[(1, 1)].re);
    let off = h[(0, 1)];
    let (bx, by) = (off.re, -off.im);
    let norm = (bx * bx + by * by + bz * bz).sqrt();
    let (c, s_over) =
        if norm * tau.abs() < 1e-300 { (1.0, tau) } else { ((norm * tau).cos(), (norm * tau).sin() / norm) };
    let g = C64::from_polar(1.0, -a * tau);
    let mi = C64::new(0.0, -s_over);
    let m00 = C64::new(c, 0.0) + mi * bz;
    let m11 = C64::new(c, 0.0) - mi * bz;
    let m01 = mi * C64::new(bx, -by);
    let m10 = mi * C64::new(bx, by);
    DMatrix::from_row_slice(2, 2, &[g * m00, g * m01, g * m10, g * m11])
}

/// Relative Frobenius norm of `m - m^dagger`.
pub fn hermiticity_defect(m: &DMatrix<C64>) -> f64 {
    let scale = m.norm().max(f64::MIN_POSITIVE);
    (m - m.adjoint()).norm() / scale
}

/// Frobenius norm of `u^dagger u - I`.
pub fn unitarity_defect(u: &DMatrix<C64>) -> f64 {
    let n = u.ncols();
    (u.adjoint() * u - DMatrix::<C64>::identity(n, n)).norm()
}

/// Promotes a real matrix to complex.
pub fn to_complex(m: &DMatrix<f64>) -> DMatrix<C64> {
    m.map(|x| C64::new(x, 0.0))
}

//! Special functions, scalar solvers and small dense linear-algebra helpers.

pub mod bessel;
pub mod linalg;
pub mod roots;

pub use bessel::{bessel_j, j0_plus_j2};
pub use linalg::{wrap_phase, C64};

//! Derivative-free scalar root finding and minimization.

use crate::{Error, Result};

/// Stopping rules for [`bracketed_root`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootOptions {
    /// Relative bracket width at which iteration stops.
    pub xtol: f64,
    /// Largest accepted |f| at the returned point.
    pub ftol: f64,
    pub max_iter: usize,
}

impl Default for RootOptions {
    fn default() -> Self {
        Self { xtol: 1e-14, ftol: 1e-6, max_iter: 300 }
    }
}

/// Root of `f` inside a sign-changing bracket `[a, b]`.
///
/// Secant steps are taken while they at least halve the bracket; otherwise
/// the next step bisects.
pub fn bracketed_root<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, opts: RootOptions) -> Result<f64> {
    let (mut a, mut b) = (a, b);
    let (mut fa, mut fb) = (f(a), f(b));
    if !fa.is_finite() || !fb.is_finite() {
        return Err(Error::NoRoot(format!("non-finite value at bracket [{a}, {b}]")));
    }
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(Error::NoRoot(format!("no sign change on [{a}, {b}]")));
    }
    let mut use_secant = true;
    for _ in 0..opts.max_iter {
        let width = (b - a).abs();
        let secant = b - fb * (b - a) / (fb - fa);
        let (lo, hi) = (a.min(b), a.max(b));
        let x = if use_secant && secant > lo && secant < hi { secant } else { 0.5 * (a + b) };
        let fx = f(x);
        if fx == 0.0 {
            return Ok(x);
        }
        if fx.signum() == fa.signum() {
            a = x;
            fa = fx;
        } else {
            b = x;
            fb = fx;
        }
        use_secant = (b - a).abs() < 0.5 * width;
        if (b - a).abs() <= opts.xtol * (1.0 + x.abs()) {
            break;
        }
    }
    let (x, fx) = if fa.abs() < fb.abs() { (a, fa) } else { (b, fb) };
    if fx.abs() > opts.ftol {
        return Err(Error::NoConvergence(format!("residual {fx:.3e} at x = {x}")));
    }
    Ok(x)
}

/// First sub-interval of an `n`-point uniform scan of `[a, b]` on which `f`
/// changes sign.
pub fn first_bracket<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, n: usize) -> Option<(f64, f64)> {
    let n = n.max(2);
    let mut x0 = a;
    let mut f0 = f(a);
    if f0 == 0.0 {
        return Some((a, a));
    }
    for i in 1..n {
        let x1 = a + (b - a) * i as f64 / (n - 1) as f64;
        let f1 = f(x1);
        if f1 == 0.0 || f0.signum() != f1.signum() {
            return Some((x0, x1));
        }
        x0 = x1;
        f0 = f1;
    }
    None
}

/// Golden-section minimization of a unimodal `f` on `[a, b]`.
/// Returns the abscissa and value at the minimum.
pub fn golden_section<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, tol: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (a, b);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    if fc < fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

//! Bessel functions of the first kind for integer order.
//!
//! Values come from Miller's backward recurrence normalized with the
//! Neumann identity `J_0(x) + 2 * sum_k J_{2k}(x) = 1`, which stays stable
//! for every order and argument the drive formulas need.

/// First positive zero of `J_0`.
pub const J0_FIRST_ZERO: f64 = 2.404_825_557_695_773;
/// First positive zero of `J_1`, which is also the first zero of `J_0 + J_2`.
pub const J1_FIRST_ZERO: f64 = 3.831_705_970_207_512;
/// Location of the first maximum of `J_1`.
pub const J1_FIRST_MAX: f64 = 1.841_183_781_340_659;

const RESCALE_ABOVE: f64 = 1e250;
const RESCALE_BY: f64 = 1e-250;

/// `J_n(x)` for any integer order and real argument.
pub fn bessel_j(n: i32, x: f64) -> f64 {
    let order = n.unsigned_abs();
    let mut sign = if n < 0 && order % 2 == 1 { -1.0 } else { 1.0 };
    if x < 0.0 && order % 2 == 1 {
        sign = -sign;
    }
    sign * bessel_j_nonneg(order, x.abs())
}

/// `J_0(x) + J_2(x)`, the nonlinear factor of the resonant sideband coupling.
pub fn j0_plus_j2(x: f64) -> f64 {
    let values = bessel_j_table(2, x.abs());
    values[0] + values[2]
}

/// `J_0(x), ..., J_nmax(x)` for `x >= 0` in one recurrence sweep.
pub fn bessel_j_table(nmax: u32, x: f64) -> Vec<f64> {
    debug_assert!(x >= 0.0);
    let len = nmax as usize + 1;
    let mut out = vec![0.0; len];
    if x == 0.0 {
        out[0] = 1.0;
        return out;
    }
    let span = (nmax as f64).max(x);
    let mut start = (span + 30.0 + 6.0 * span.sqrt()).ceil() as usize;
    if start % 2 == 1 {
        start += 1;
    }

    let two_over_x = 2.0 / x;
    let mut above = 0.0_f64;
    let mut current = 1e-300_f64;
    let mut norm = 0.0_f64;
    for k in (1..=start).rev() {
        // J_{k-1} = (2k/x) J_k - J_{k+1}
        let below = k as f64 * two_over_x * current - above;
        above = current;
        current = below;
        let idx = k - 1;
        if idx < len {
            out[idx] = current;
        }
        if idx % 2 == 0 && idx > 0 {
            norm += 2.0 * current;
        }
        if current.abs() > RESCALE_ABOVE {
            current *= RESCALE_BY;
            above *= RESCALE_BY;
            norm *= RESCALE_BY;
            for v in out.iter_mut() {
                *v *= RESCALE_BY;
            }
        }
    }
    norm += current;
    for v in out.iter_mut() {
        *v /= norm;
    }
    out
}

fn bessel_j_nonneg(order: u32, x: f64) -> f64 {
    if x == 0.0 {
        return if order == 0 { 1.0 } else { 0.0 };
    }
    bessel_j_table(order, x)[order as usize]
}

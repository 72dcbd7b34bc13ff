//! Least-squares fit of `A sin^2(W t) + c` to a population trace.

use serde::Serialize;

use crate::numerics::roots::golden_section;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RabiFit {
    /// `W` in rad/ns.
    pub frequency: f64,
    pub amplitude: f64,
    pub offset: f64,
    /// Root-mean-square residual.
    pub rms: f64,
}

impl RabiFit {
    /// Exchange coupling of a two-level transfer `(g/W)^2 sin^2(W t)`.
    pub fn coupling(&self) -> f64 {
        self.frequency * self.amplitude.max(0.0).sqrt()
    }
}

/// Largest rms residual relative to the trace spread that counts as a fit.
const MAX_RELATIVE_RMS: f64 = 0.2;

fn linear_fit(t: &[f64], y: &[f64], w: f64) -> (f64, f64, f64) {
    // y ~ a * s + c with s = sin^2(w t)
    let n = t.len() as f64;
    let (mut ss, mut s1, mut sy, mut y1) = (0.0, 0.0, 0.0, 0.0);
    for (&ti, &yi) in t.iter().zip(y) {
        let s = (w * ti).sin().powi(2);
        ss += s * s;
        s1 += s;
        sy += s * yi;
        y1 += yi;
    }
    let det = n * ss - s1 * s1;
    let (a, c) =
        if det.abs() < 1e-14 * n * n { (0.0, y1 / n) } else { ((n * sy - s1 * y1) / det, (ss * y1 - s1 * sy) / det) };
    let sse: f64 = t.iter().zip(y).map(|(&ti, &yi)| (yi - a * (w * ti).sin().powi(2) - c).powi(2)).sum();
    (a, c, (sse / n).sqrt())
}

/// Fits `A sin^2(W t) + c`; `W` is searched between a quarter cycle over the
/// record and the sampling limit.
pub fn rabi_fit(times: &[f64], values: &[f64]) -> Result<RabiFit> {
    rabi_fit_with(times, values, MAX_RELATIVE_RMS)
}

/// [`rabi_fit`] with a caller-chosen bound on `rms / spread`.
pub fn rabi_fit_with(times: &[f64], values: &[f64], max_relative_rms: f64) -> Result<RabiFit> {
    if times.len() != values.len() || times.len() < 8 {
        return Err(Error::FitFailed("need at least 8 matching samples".into()));
    }
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    let spread = (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / values.len() as f64).sqrt();
    if spread < 1e-9 {
        return Err(Error::FitFailed("trace is constant".into()));
    }
    let span = times.last().expect("nonempty") - times[0];
    let h = span / (times.len() - 1) as f64;
    let w_lo = std::f64::consts::PI / (8.0 * span);
    let w_hi = std::f64::consts::PI / (2.0 * h);
    let grid = 4000;
    let ratio = (w_hi / w_lo).powf(1.0 / (grid - 1) as f64);
    let mut best = (f64::INFINITY, w_lo, 0usize);
    let mut w = w_lo;
    for i in 0..grid {
        let (_, _, rms) = linear_fit(times, values, w);
        if rms < best.0 {
            best = (rms, w, i);
        }
        w *= ratio;
    }
    let (lo, hi) = (best.1 / ratio, best.1 * ratio);
    let (w, _) = golden_section(|w| linear_fit(times, values, w).2, lo, hi, 1e-12 * best.1.max(1e-300));
    let (a, c, rms) = linear_fit(times, values, w);
    if rms > max_relative_rms * spread {
        return Err(Error::FitFailed(format!("residual {rms:.3e} too large for spread {spread:.3e}")));
    }
    Ok(RabiFit { frequency: w, amplitude: a, offset: c, rms })
}

/// Sliding boxcar mean over one `period`, advanced by a quarter period.
/// Removes micromotion at the drive frequency and its harmonics. Samples
/// must be uniformly spaced.
pub fn period_average(times: &[f64], values: &[f64], period: f64) -> (Vec<f64>, Vec<f64>) {
    if times.len() < 2 {
        return (times.to_vec(), values.to_vec());
    }
    let h = times[1] - times[0];
    let w = ((period / h).round() as usize).max(1);
    if w >= values.len() {
        return (times.to_vec(), values.to_vec());
    }
    let step = (w / 4).max(1);
    let mut t_out = Vec::new();
    let mut v_out = Vec::new();
    let mut start = 0;
    while start + w <= values.len() {
        t_out.push(times[start] + 0.5 * (w - 1) as f64 * h);
        v_out.push(values[start..start + w].iter().sum::<f64>() / w as f64);
        start += step;
    }
    (t_out, v_out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_synthetic_frequency() {
        let t: Vec<f64> = (0..400).map(|i| i as f64 * 0.25).collect();
        let y: Vec<f64> = t.iter().map(|t| (0.1 * t).sin().powi(2)).collect();
        let fit = rabi_fit(&t, &y).unwrap();
        assert!((fit.frequency - 0.1).abs() < 1e-4);
        assert!((fit.amplitude - 1.0).abs() < 1e-6);
    }

    #[test]
    fn partial_detuned_transfer() {
        let t: Vec<f64> = (0..300).map(|i| i as f64 * 0.1).collect();
        let (g, d): (f64, f64) = (0.05, 0.04);
        let w = (g * g + d * d / 4.0).sqrt();
        let y: Vec<f64> = t.iter().map(|t| (g / w).powi(2) * (w * t).sin().powi(2)).collect();
        let fit = rabi_fit(&t, &y).unwrap();
        assert!((fit.coupling() - g).abs() < 1e-6);
    }

    #[test]
    fn constant_trace_fails() {
        let t: Vec<f64> = (0..50).map(|i| i as f64).collect();
        assert!(matches!(rabi_fit(&t, &vec![0.3; 50]), Err(Error::FitFailed(_))));
    }

    #[test]
    fn period_average_removes_fast_wiggle() {
        let t: Vec<f64> = (0..4000).map(|i| i as f64 * 0.05).collect();
        let y: Vec<f64> = t.iter().map(|t| (0.02 * t).sin().powi(2) + 0.05 * (3.0 * t).sin()).collect();
        let period = 2.0 * std::f64::consts::PI / 3.0;
        let (ts, ys) = period_average(&t, &y, period);
        let fit = rabi_fit(&ts, &ys).unwrap();
        assert!((fit.frequency - 0.02).abs() < 2e-4);
    }
}

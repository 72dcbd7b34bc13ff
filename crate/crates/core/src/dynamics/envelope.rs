//! Pulse envelopes.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum EnvelopeShape {
    /// Unit value for `t >= 0`.
    Rectangular,
    /// Gaussian rise over `tau_1`, plateau for `tau_2`, Gaussian fall over `tau_1`.
    FlatTopGaussian { tau_1: f64, tau_2: f64, sigma: f64 },
}

/// Envelope `scale * f(t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeSpec {
    pub shape: EnvelopeShape,
    pub scale: f64,
}

impl Default for EnvelopeSpec {
    fn default() -> Self {
        Self::rectangular()
    }
}

impl EnvelopeSpec {
    pub fn rectangular() -> Self {
        Self { shape: EnvelopeShape::Rectangular, scale: 1.0 }
    }

    pub fn flat_top(tau_1: f64, tau_2: f64, sigma: f64) -> Self {
        Self { shape: EnvelopeShape::FlatTopGaussian { tau_1, tau_2, sigma }, scale: 1.0 }
    }

    /// Flat top filling `gate_time` with `tau_1 = 2 sigma = 10 ns`.
    pub fn default_flat_top(gate_time: f64) -> Self {
        Self::flat_top(10.0, gate_time - 20.0, 5.0)
    }

    pub fn with_scale(mut self, scale: f64) -> Self {
        self.scale = scale;
        self
    }

    /// Total pulse length, if the shape has one.
    pub fn duration(&self) -> Option<f64> {
        match self.shape {
            EnvelopeShape::Rectangular => None,
            EnvelopeShape::FlatTopGaussian { tau_1, tau_2, .. } => Some(2.0 * tau_1 + tau_2),
        }
    }

    pub fn value(&self, t: f64) -> f64 {
        self.scale * self.unit_value(t)
    }

    fn unit_value(&self, t: f64) -> f64 {
        match self.shape {
            EnvelopeShape::Rectangular => {
                if t >= 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            EnvelopeShape::FlatTopGaussian { tau_1, tau_2, sigma } => {
                let gauss = |x: f64| (-(x * x) / (2.0 * sigma * sigma)).exp();
                if t < 0.0 || t > 2.0 * tau_1 + tau_2 {
                    0.0
                } else if t < tau_1 {
                    gauss(t - tau_1)
                } else if t <= tau_1 + tau_2 {
                    1.0
                } else {
                    gauss(t - tau_1 - tau_2)
                }
            }
        }
    }

    /// Integral of the unscaled shape over `[0, gate_time]` (Simpson rule).
    pub fn unit_area(&self, gate_time: f64) -> f64 {
        let n = 20_000;
        let h = gate_time / n as f64;
        let mut s = self.unit_value(0.0) + self.unit_value(gate_time);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            s += w * self.unit_value(i as f64 * h);
        }
        s * h / 3.0
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.scale.is_finite() && self.scale > 0.0) {
            return Err(Error::Config("envelope scale must be positive".into()));
        }
        if let EnvelopeShape::FlatTopGaussian { tau_1, tau_2, sigma } = self.shape {
            if !(tau_1 >= 0.0 && tau_2 >= 0.0 && sigma > 0.0) {
                return Err(Error::Config("flat-top envelope needs tau_1, tau_2 >= 0 and sigma > 0".into()));
            }
        }
        Ok(())
    }

    /// Checks that a flat-top pulse exactly fills the gate.
    pub fn validate_for_gate(&self, gate_time: f64) -> Result<()> {
        self.validate()?;
        if let Some(total) = self.duration() {
            if (total - gate_time).abs() > 1e-9 * gate_time.max(1.0) {
                return Err(Error::Config(format!(
                    "flat-top duration 2*tau_1 + tau_2 = {total} ns differs from gate time {gate_time} ns"
                )));
            }
        }
        Ok(())
    }
}

//! Quantities with explicit unit suffixes.
//!
//! Frequencies are written as ordinary frequencies (`"7.15 GHz"`) and
//! converted to rad/ns; `"rad/ns"` is taken as already angular.

use std::f64::consts::PI;
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dimension {
    Frequency,
    Time,
    Angle,
}

impl fmt::Display for Dimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Dimension::Frequency => "frequency (GHz, MHz, kHz, Hz or rad/ns)",
            Dimension::Time => "time (ns, us, ps)",
            Dimension::Angle => "angle (deg, rad)",
        })
    }
}

/// Scale from `unit` to internal units, if `unit` measures `dim`.
/// `(prefactor, unit factor)`; the value is `prefactor * x * factor`, the
/// same operation order as `cfsim_core::mhz`.
fn scale(dim: Dimension, unit: &str) -> Option<(f64, f64)> {
    let s = match (dim, unit) {
        (Dimension::Frequency, "GHz") => (2.0 * PI, 1.0),
        (Dimension::Frequency, "MHz") => (2.0 * PI, 1e-3),
        (Dimension::Frequency, "kHz") => (2.0 * PI, 1e-6),
        (Dimension::Frequency, "Hz") => (2.0 * PI, 1e-9),
        (Dimension::Frequency, "rad/ns") => (1.0, 1.0),
        (Dimension::Time, "ns") => (1.0, 1.0),
        (Dimension::Time, "us") => (1.0, 1e3),
        (Dimension::Time, "ps") => (1.0, 1e-3),
        (Dimension::Angle, "deg") => (1.0, PI / 180.0),
        (Dimension::Angle, "rad") => (1.0, 1.0),
        _ => return None,
    };
    Some(s)
}

/// Splits `"7.15 GHz"` into `(7.15, "GHz")`. The unit is empty when absent.
pub fn split_quantity(text: &str) -> Result<(f64, &str), String> {
    let text = text.trim();
    let end = text
        .char_indices()
        .find(|&(i, c)| !(c.is_ascii_digit() || c == '.' || c == '+' || c == '-' || ((c == 'e' || c == 'E') && i > 0)))
        .map(|(i, _)| i)
        .unwrap_or(text.len());
    // an exponent marker directly before the unit belongs to the unit
    let (mut num, mut unit) = text.split_at(end);
    if num.ends_with(['e', 'E']) {
        num = &text[..end - 1];
        unit = &text[end - 1..];
    }
    let value: f64 = num.trim().parse().map_err(|_| format!("`{text}` does not start with a number"))?;
    if !value.is_finite() {
        return Err(format!("`{text}` is not finite"));
    }
    Ok((value, unit.trim()))
}

/// Parses a quantity of dimension `dim`. A missing unit is an error.
pub fn parse_quantity(text: &str, dim: Dimension) -> Result<f64, String> {
    let (value, unit) = split_quantity(text)?;
    if unit.is_empty() {
        return Err(format!("`{text}` has no unit; expected a {dim}"));
    }
    scale(dim, unit).map(|(p, f)| p * value * f).ok_or_else(|| format!("unit `{unit}` in `{text}` is not a {dim}"))
}

/// Formats with `digits` significant digits, `%g` style.
pub fn sig(x: f64, digits: usize) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let exp = x.abs().log10().floor() as i32;
    let d = digits as i32;
    let text = if (-5..d).contains(&exp) {
        let decimals = (d - 1 - exp).max(0) as usize;
        trim_zeros(format!("{x:.decimals$}"))
    } else {
        let s = format!("{x:.*e}", digits - 1);
        let (mantissa, e) = s.split_once('e').unwrap();
        format!("{}e{e}", trim_zeros(mantissa.to_string()))
    };
    if text == "-0" {
        "0".into()
    } else {
        text
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantities() {
        assert!((parse_quantity("7.15 GHz", Dimension::Frequency).unwrap() - 2.0 * PI * 7.15).abs() < 1e-12);
        assert!((parse_quantity("-200MHz", Dimension::Frequency).unwrap() + 2.0 * PI * 0.2).abs() < 1e-12);
        assert_eq!(parse_quantity("1.5e2 ns", Dimension::Time).unwrap(), 150.0);
        assert_eq!(parse_quantity("2 us", Dimension::Time).unwrap(), 2000.0);
        assert!((parse_quantity("90 deg", Dimension::Angle).unwrap() - PI / 2.0).abs() < 1e-15);
        assert!(parse_quantity("7.15", Dimension::Frequency).unwrap_err().contains("no unit"));
        assert!(parse_quantity("7 ns", Dimension::Frequency).unwrap_err().contains("not a frequency"));
        assert!(parse_quantity("GHz", Dimension::Frequency).is_err());
        assert_eq!(parse_quantity("120 MHz", Dimension::Frequency).unwrap(), cfsim_core::mhz(120.0));
        assert_eq!(parse_quantity("7.6 GHz", Dimension::Frequency).unwrap(), cfsim_core::ghz(7.6));
    }

    #[test]
    fn significant_digits() {
        assert_eq!(sig(0.0, 6), "0");
        assert_eq!(sig(99.66712345, 6), "99.6671");
        assert_eq!(sig(-3.5, 6), "-3.5");
        assert_eq!(sig(1.23456789e-7, 6), "1.23457e-7");
        assert_eq!(sig(123456789.0, 6), "1.23457e8");
        assert_eq!(sig(0.000123456789, 6), "0.000123457");
        assert_eq!(sig(-1e-20, 6), "-1e-20");
    }
}

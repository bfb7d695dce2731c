//! Quantities written as `"<number> <unit>"`.
//!
//! Natural-unit experiments measure frequencies in units of the oscillator
//! spacing ε; the hydrogen box uses SI. Every physical value in a config
//! carries its unit and anything unrecognized is rejected.

use std::f64::consts::PI;

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quantity {
    pub value: f64,
    unit: UnitTag,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum UnitTag {
    Natural,
    Eps,
    Gamma,
    TauF,
    Deg,
    Rad,
    Seconds(i32),
    Meters(i32),
    InverseMeters(i32),
    /// Multiples of the Einstein A coefficient (rate) or of `1/A` (time).
    Einstein,
}

pub fn parse(key: &str, text: &str) -> CliResult<Quantity> {
    let mut parts = text.split_whitespace();
    let (Some(number), Some(unit), None) = (parts.next(), parts.next(), parts.next()) else {
        return Err(CliError::config(format!("{key}: expected \"<number> <unit>\", got \"{text}\"")));
    };
    let value: f64 = number.parse().map_err(|_| CliError::config(format!("{key}: \"{number}\" is not a number")))?;
    if !value.is_finite() {
        return Err(CliError::config(format!("{key}: value must be finite")));
    }
    let unit = match unit {
        "natural" => UnitTag::Natural,
        "eps" => UnitTag::Eps,
        "gamma" => UnitTag::Gamma,
        "tau_F" => UnitTag::TauF,
        "deg" => UnitTag::Deg,
        "rad" => UnitTag::Rad,
        "s" => UnitTag::Seconds(0),
        "ms" => UnitTag::Seconds(-3),
        "us" => UnitTag::Seconds(-6),
        "ns" => UnitTag::Seconds(-9),
        "ps" => UnitTag::Seconds(-12),
        "m" => UnitTag::Meters(0),
        "mm" => UnitTag::Meters(-3),
        "um" => UnitTag::Meters(-6),
        "nm" => UnitTag::Meters(-9),
        "m^-1" => UnitTag::InverseMeters(0),
        "cm^-1" => UnitTag::InverseMeters(2),
        "A" | "tau" => UnitTag::Einstein,
        other => return Err(CliError::config(format!("{key}: unknown unit \"{other}\""))),
    };
    Ok(Quantity { value, unit })
}

fn wrong(key: &str, kind: &str, allowed: &str) -> CliError {
    CliError::config(format!("{key}: not a {kind}; use one of {allowed}"))
}

/// Scales of a natural-unit experiment: spacing ε and coupling η.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Natural {
    pub epsilon: f64,
    pub eta: f64,
}

impl Natural {
    /// `2πη²/ε`.
    pub fn gamma(&self) -> f64 {
        2.0 * PI * self.eta * self.eta / self.epsilon
    }

    pub fn tau_f(&self) -> f64 {
        1.0 / self.gamma()
    }

    pub fn frequency(&self, key: &str, q: Quantity) -> CliResult<f64> {
        match q.unit {
            UnitTag::Natural => Ok(q.value),
            UnitTag::Eps => Ok(q.value * self.epsilon),
            UnitTag::Gamma => Ok(q.value * self.gamma()),
            _ => Err(wrong(key, "frequency", "natural, eps, gamma")),
        }
    }

    pub fn time(&self, key: &str, q: Quantity) -> CliResult<f64> {
        match q.unit {
            UnitTag::Natural => Ok(q.value),
            UnitTag::TauF => Ok(q.value * self.tau_f()),
            _ => Err(wrong(key, "time", "natural, tau_F")),
        }
    }
}

/// ε itself: a natural frequency with no other scale to refer to.
pub fn spacing(key: &str, q: Quantity) -> CliResult<f64> {
    match q.unit {
        UnitTag::Natural => Ok(q.value),
        _ => Err(wrong(key, "spacing", "natural")),
    }
}

/// η in natural units or as a multiple of ε.
pub fn coupling(key: &str, q: Quantity, epsilon: f64) -> CliResult<f64> {
    match q.unit {
        UnitTag::Natural => Ok(q.value),
        UnitTag::Eps => Ok(q.value * epsilon),
        _ => Err(wrong(key, "coupling", "natural, eps")),
    }
}

pub fn angle(key: &str, q: Quantity) -> CliResult<f64> {
    match q.unit {
        UnitTag::Deg => Ok(q.value.to_radians()),
        UnitTag::Rad => Ok(q.value),
        _ => Err(wrong(key, "angle", "deg, rad")),
    }
}

pub fn length(key: &str, q: Quantity) -> CliResult<f64> {
    match q.unit {
        UnitTag::Meters(e) => Ok(q.value * 10f64.powi(e)),
        _ => Err(wrong(key, "length", "m, mm, um, nm")),
    }
}

pub fn wavenumber(key: &str, q: Quantity) -> CliResult<f64> {
    match q.unit {
        UnitTag::InverseMeters(e) => Ok(q.value * 10f64.powi(e)),
        _ => Err(wrong(key, "wavenumber", "m^-1, cm^-1")),
    }
}

/// SI time; `tau` counts lifetimes `1/A`.
pub fn si_time(key: &str, q: Quantity, einstein_a: f64) -> CliResult<f64> {
    match q.unit {
        UnitTag::Seconds(e) => Ok(q.value * 10f64.powi(e)),
        UnitTag::Einstein => Ok(q.value / einstein_a),
        _ => Err(wrong(key, "time", "s, ms, us, ns, ps, tau")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_converts() {
        let n = Natural { epsilon: 2.0, eta: 1.0 };
        assert_eq!(n.frequency("x", parse("x", "3 eps").unwrap()).unwrap(), 6.0);
        assert!((n.time("x", parse("x", "1 tau_F").unwrap()).unwrap() - 1.0 / PI).abs() < 1e-15);
        assert!((angle("x", parse("x", "180 deg").unwrap()).unwrap() - PI).abs() < 1e-15);
        assert!((length("x", parse("x", "0.21 mm").unwrap()).unwrap() - 0.21e-3).abs() < 1e-18);
        assert_eq!(wavenumber("x", parse("x", "8.19 m^-1").unwrap()).unwrap(), 8.19);
        assert_eq!(coupling("x", parse("x", "2.4 eps").unwrap(), 1.0).unwrap(), 2.4);
    }

    #[test]
    fn rejects_bad_units() {
        assert!(parse("x", "2.4").is_err());
        assert!(parse("x", "2.4 furlongs").is_err());
        assert!(parse("x", "abc eps").is_err());
        assert!(parse("x", "1 eps extra").is_err());
        let n = Natural { epsilon: 1.0, eta: 1.0 };
        assert!(n.time("x", parse("x", "1 eps").unwrap()).is_err());
        assert!(angle("x", parse("x", "1 natural").unwrap()).is_err());
    }
}

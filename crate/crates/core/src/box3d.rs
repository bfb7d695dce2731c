//! Standing-wave modes of a rectangular box and their dipolar couplings to a
//! hydrogen-like 2p_z → 1s transition.
//!
//! All frequencies are angular frequencies in rad/s, stored as offsets from
//! the atomic resonance `ω_0 = c k_0`.

use std::f64::consts::PI;

use crate::error::{domain, Error, Result};
use crate::model::{ModeGeometry, ModeSet};

/// CODATA 2018 values.
pub mod constants {
    pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
    pub const HBAR: f64 = 1.054_571_817e-34;
    pub const VACUUM_PERMITTIVITY: f64 = 8.854_187_812_8e-12;
    pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;
    pub const BOHR_RADIUS: f64 = 5.291_772_109_03e-11;
}

use constants::*;

/// Lyman-alpha line of hydrogen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HydrogenParams {
    /// Vacuum wavelength, m.
    pub wavelength: f64,
    /// Frequency, Hz.
    pub frequency: f64,
    /// Einstein A coefficient, 1/s.
    pub einstein_a: f64,
    /// Lifetime `1/A`, s.
    pub lifetime: f64,
    /// Transition dipole moment, C·m.
    pub dipole: f64,
}

impl HydrogenParams {
    pub fn lyman_alpha() -> Self {
        let wavelength = 121.566_824e-9;
        let einstein_a = 6.2648e8;
        Self {
            wavelength,
            frequency: SPEED_OF_LIGHT / wavelength,
            einstein_a,
            lifetime: 1.0 / einstein_a,
            dipole: hydrogen_dipole_moment(),
        }
    }

    /// Resonance wavenumber `2π/λ`, 1/m.
    pub fn k0(&self) -> f64 {
        2.0 * PI / self.wavelength
    }
}

/// `⟨2p_z| q z |1s⟩ = -e a_0 4 (2/3)^5 √2`, with the electron charge `-e`.
pub fn hydrogen_dipole_moment() -> f64 {
    -ELEMENTARY_CHARGE * BOHR_RADIUS * 4.0 * (2.0f64 / 3.0).powi(5) * 2.0f64.sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoxSpec {
    /// Edge lengths, m.
    pub lengths: [f64; 3],
    /// Resonance wavenumber, 1/m.
    pub k0: f64,
    /// Shell half-width, 1/m.
    pub delta: f64,
    /// Transition dipole moment, C·m.
    pub dipole: f64,
}

impl BoxSpec {
    pub fn validate(&self) -> Result<()> {
        if self.lengths.iter().any(|l| !(*l > 0.0 && l.is_finite())) {
            return domain("box edges must be positive");
        }
        if !(self.delta > 0.0 && self.delta < self.k0) {
            return domain("the shell half-width must satisfy 0 < Δ < k0");
        }
        if !self.dipole.is_finite() {
            return domain("dipole moment must be finite");
        }
        Ok(())
    }

    pub fn volume(&self) -> f64 {
        self.lengths.iter().product()
    }

    /// Angular frequency width of the shell, `2 Δ c`.
    pub fn bandwidth(&self) -> f64 {
        2.0 * self.delta * SPEED_OF_LIGHT
    }

    /// The slightly distorted 0.21 mm cube with the Lyman-alpha line.
    pub fn hydrogen_table2() -> Self {
        let h = HydrogenParams::lyman_alpha();
        Self {
            lengths: [0.210_259_195_465_634e-3, 0.210_049_146_319_314_7e-3, 0.210_469_665_130_764_7e-3],
            k0: h.k0(),
            delta: 8.186_561_5,
            dipole: h.dipole,
        }
    }

    /// Desk-scale variant: the same box shape shrunk by [`DESK_SCALE`], with a
    /// shell of ±10 natural linewidths; about two thousand modes.
    pub fn desk() -> Self {
        let h = HydrogenParams::lyman_alpha();
        let t = Self::hydrogen_table2();
        Self {
            lengths: t.lengths.map(|l| l * DESK_SCALE),
            k0: h.k0(),
            delta: DESK_LINEWIDTHS * h.einstein_a / SPEED_OF_LIGHT,
            dipole: h.dipole,
        }
    }
}

pub const DESK_SCALE: f64 = 0.336;
pub const DESK_LINEWIDTHS: f64 = 10.0;

/// Dipolar coupling of one mode, as an angular frequency:
/// `-μ sin θ (ħ ω / (2 ε_0 V))^{1/2} / ħ`.
///
/// The factor 1/2 is the vacuum field per photon of a single standing-wave
/// mode; it makes the golden-rule rate of the box equal the Einstein A
/// coefficient.
pub fn coupling_constant(theta: f64, omega: f64, dipole: f64, volume: f64) -> Result<f64> {
    if !(volume > 0.0) {
        return domain("volume must be positive");
    }
    if !(omega > 0.0) {
        return domain("mode frequency must be positive");
    }
    Ok(-dipole * theta.sin() * (HBAR * omega / (2.0 * VACUUM_PERMITTIVITY * volume)).sqrt() / HBAR)
}

struct Mode {
    n: [u32; 3],
    k: [f64; 3],
    norm: f64,
}

/// All cosine standing waves `k_α = n_α π / L_α`, `n_α >= 1`, with
/// `k0 - Δ < |k| < k0 + Δ`, ordered by offset then lattice indices.
pub fn enumerate_modes(spec: &BoxSpec) -> Result<ModeSet> {
    spec.validate()?;
    let (lo, hi) = (spec.k0 - spec.delta, spec.k0 + spec.delta);
    let step = spec.lengths.map(|l| PI / l);
    let max_n = |a: usize| (hi / step[a]).ceil() as u32;
    let mut modes = Vec::new();
    for nx in 1..=max_n(0) {
        let kx = nx as f64 * step[0];
        if kx >= hi {
            break;
        }
        for ny in 1..=max_n(1) {
            let ky = ny as f64 * step[1];
            let rxy = kx * kx + ky * ky;
            if rxy >= hi * hi {
                break;
            }
            let zmin = (lo * lo - rxy).max(0.0).sqrt() / step[2];
            let zmax = (hi * hi - rxy).sqrt() / step[2];
            let first = (zmin.floor() as u32).max(1);
            for nz in first..=(zmax.ceil() as u32) {
                let kz = nz as f64 * step[2];
                let norm = (rxy + kz * kz).sqrt();
                if norm > lo && norm < hi {
                    modes.push(Mode { n: [nx, ny, nz], k: [kx, ky, kz], norm });
                }
            }
        }
    }
    if modes.is_empty() {
        return Err(Error::EmptyShell { lo, hi });
    }
    modes.sort_by(|a, b| a.norm.total_cmp(&b.norm).then(a.n.cmp(&b.n)));

    let volume = spec.volume();
    let mut offsets = Vec::with_capacity(modes.len());
    let mut couplings = Vec::with_capacity(modes.len());
    let mut geometry = Vec::with_capacity(modes.len());
    for m in &modes {
        let theta = (m.k[0].hypot(m.k[1])).atan2(m.k[2]);
        offsets.push((m.norm - spec.k0) * SPEED_OF_LIGHT);
        couplings.push(coupling_constant(theta, m.norm * SPEED_OF_LIGHT, spec.dipole, volume)?);
        geometry.push(ModeGeometry { indices: m.n, k: m.k, theta });
    }
    ModeSet::new(offsets, couplings, Some(geometry))
}

/// `2π ⟨η²⟩ ρ` with the density estimated as `(N-1)/span` of the offsets,
/// so that an equidistant set with spacing `ε` gives exactly `1/ε`.
pub fn golden_rule_rate(modes: &ModeSet) -> Result<f64> {
    let n = modes.len();
    if n < 2 {
        return domain("need at least two modes to estimate a density");
    }
    let (lo, hi) = modes.offsets().iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
    if !(hi > lo) {
        return domain("all modes are degenerate");
    }
    Ok(2.0 * PI * mean_square(modes.couplings()) * (n - 1) as f64 / (hi - lo))
}

/// `2π ⟨η²⟩ N / (2 Δ c)`: the density taken as the mode count over the
/// full shell width.
pub fn golden_rule_rate_in_shell(modes: &ModeSet, spec: &BoxSpec) -> Result<f64> {
    if modes.len() < 2 {
        return domain("need at least two modes to estimate a density");
    }
    Ok(2.0 * PI * mean_square(modes.couplings()) * modes.len() as f64 / spec.bandwidth())
}

fn mean_square(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64
}

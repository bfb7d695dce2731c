//! Core domain types shared by the solvers.
//!
//! Conventions: the pseudo-1D models work in natural units (ħ = 1, the
//! oscillator spacing ε is the energy/frequency unit); the 3D box works in SI
//! with H/ħ as generator, so every energy is an angular frequency in rad/s.
//! Frequencies are always stored as offsets from the atomic resonance.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{domain, Error, Result};

/// Wavevector record of one standing-wave mode of a box.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeGeometry {
    /// Lattice indices (n_x, n_y, n_z), k_α = n_α π / L_α.
    pub indices: [u32; 3],
    /// Wavevector components in m⁻¹.
    pub k: [f64; 3],
    /// Polar angle between the wavevector and the z-axis, in rad.
    pub theta: f64,
}

/// The field-oscillator ensemble.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeSet {
    offsets: Vec<f64>,
    couplings: Vec<f64>,
    geometry: Option<Vec<ModeGeometry>>,
}

impl ModeSet {
    pub fn new(offsets: Vec<f64>, couplings: Vec<f64>, geometry: Option<Vec<ModeGeometry>>) -> Result<Self> {
        if offsets.is_empty() {
            return domain("a mode set needs at least one oscillator");
        }
        if offsets.len() != couplings.len() {
            return Err(Error::DimensionMismatch { expected: offsets.len(), got: couplings.len() });
        }
        if let Some(g) = &geometry {
            if g.len() != offsets.len() {
                return Err(Error::DimensionMismatch { expected: offsets.len(), got: g.len() });
            }
        }
        if offsets.iter().chain(couplings.iter()).any(|x| !x.is_finite()) {
            return domain("offsets and couplings must be finite");
        }
        if geometry.is_none() {
            let mut sorted = offsets.clone();
            sorted.sort_by(f64::total_cmp);
            if sorted.windows(2).any(|w| w[0] == w[1]) {
                return domain("duplicate offsets are only allowed for modes with geometry");
            }
        }
        Ok(Self { offsets, couplings, geometry })
    }

    /// Equidistant offsets `k ε` for `1 <= |k| <= half_width`, uniform coupling.
    /// This is the oscillator lattice of the pseudo-1D model (no oscillator
    /// sits exactly on resonance).
    pub fn uniform_1d(half_width: usize, epsilon: f64, eta: f64) -> Result<Self> {
        if half_width == 0 {
            return domain("half width must be at least 1");
        }
        let hw = half_width as i64;
        let offsets: Vec<f64> = (-hw..=hw).filter(|&k| k != 0).map(|k| k as f64 * epsilon).collect();
        let couplings = vec![eta; offsets.len()];
        Self::new(offsets, couplings, None)
    }

    pub fn len(&self) -> usize {
        self.offsets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.offsets.is_empty()
    }

    pub fn offsets(&self) -> &[f64] {
        &self.offsets
    }

    pub fn couplings(&self) -> &[f64] {
        &self.couplings
    }

    pub fn geometry(&self) -> Option<&[ModeGeometry]> {
        self.geometry.as_deref()
    }
}

/// Single-photon-subspace Hamiltonian: an `m x m` atomic head block bordered
/// by `m` coupling rows onto a diagonal of oscillator offsets.
///
/// Basis order is atoms first, then oscillators.
#[derive(Debug, Clone, PartialEq)]
pub struct ArrowheadHamiltonian {
    m: usize,
    head: Vec<f64>,
    diag: Vec<f64>,
    border: Vec<Vec<f64>>,
}

impl ArrowheadHamiltonian {
    /// `head` is row-major `m x m` and must be symmetric.
    pub fn new(head: Vec<f64>, diag: Vec<f64>, border: Vec<Vec<f64>>) -> Result<Self> {
        let m = border.len();
        if !(m == 1 || m == 2) {
            return domain(format!("atomic block size must be 1 or 2, got {m}"));
        }
        if head.len() != m * m {
            return Err(Error::DimensionMismatch { expected: m * m, got: head.len() });
        }
        if m == 2 && head[1] != head[2] {
            return domain("atomic head block must be symmetric");
        }
        for row in &border {
            if row.len() != diag.len() {
                return Err(Error::DimensionMismatch { expected: diag.len(), got: row.len() });
            }
        }
        if head.iter().chain(diag.iter()).chain(border.iter().flatten()).any(|x| !x.is_finite()) {
            return domain("Hamiltonian entries must be finite");
        }
        Ok(Self { m, head, diag, border })
    }

    /// Single atom at offset `atom_offset` coupled to a mode set.
    pub fn single_atom(atom_offset: f64, modes: &ModeSet) -> Result<Self> {
        Self::new(vec![atom_offset], modes.offsets().to_vec(), vec![modes.couplings().to_vec()])
    }

    pub fn atoms(&self) -> usize {
        self.m
    }

    pub fn oscillators(&self) -> usize {
        self.diag.len()
    }

    pub fn dim(&self) -> usize {
        self.m + self.diag.len()
    }

    pub fn head(&self) -> &[f64] {
        &self.head
    }

    pub fn head_entry(&self, i: usize, j: usize) -> f64 {
        self.head[i * self.m + j]
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    pub fn border(&self, atom: usize) -> &[f64] {
        &self.border[atom]
    }

    /// Largest absolute matrix entry.
    pub fn max_abs(&self) -> f64 {
        self.head
            .iter()
            .chain(self.diag.iter())
            .chain(self.border.iter().flatten())
            .fold(0.0_f64, |a, &x| a.max(x.abs()))
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.dim();
        let m = self.m;
        let mut h = DMatrix::zeros(n, n);
        for i in 0..m {
            for j in 0..m {
                h[(i, j)] = self.head_entry(i, j);
            }
            for (k, &b) in self.border[i].iter().enumerate() {
                h[(i, m + k)] = b;
                h[(m + k, i)] = b;
            }
        }
        for (k, &d) in self.diag.iter().enumerate() {
            h[(m + k, m + k)] = d;
        }
        h
    }

    /// Little-endian bytes of every defining parameter, for content hashing.
    pub fn defining_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(8 * (2 + self.head.len() + self.diag.len() * (1 + self.m)));
        out.extend_from_slice(&(self.m as u64).to_le_bytes());
        out.extend_from_slice(&(self.diag.len() as u64).to_le_bytes());
        for x in self.head.iter().chain(self.diag.iter()).chain(self.border.iter().flatten()) {
            out.extend_from_slice(&x.to_le_bytes());
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Basis {
    /// Amplitudes over the single-excitation states |Ψ_k⟩.
    Site,
    /// Coefficients over the Hamiltonian's eigenvectors.
    Eigen,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amplitudes: Vec<Complex64>,
    basis: Basis,
}

impl StateVector {
    pub fn new(amplitudes: Vec<Complex64>, basis: Basis) -> Self {
        Self { amplitudes, basis }
    }

    /// The basis state with all amplitude on `index`.
    pub fn basis_state(dim: usize, index: usize) -> Self {
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); dim];
        amplitudes[index] = Complex64::new(1.0, 0.0);
        Self { amplitudes, basis: Basis::Site }
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amplitudes
    }

    pub fn basis(&self) -> Basis {
        self.basis
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn norm_sqr(&self) -> f64 {
        crate::sum::pairwise_sum(&self.amplitudes.iter().map(|a| a.norm_sqr()).collect::<Vec<_>>())
    }

    pub(crate) fn require_site(&self) -> Result<()> {
        if self.basis != Basis::Site {
            return domain("operation requires a site-basis state");
        }
        Ok(())
    }
}

/// Per-oscillator excitation probabilities keyed by frequency offset.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumResult {
    pub frequencies: Vec<f64>,
    pub probabilities: Vec<f64>,
    pub angles: Option<Vec<f64>>,
}

impl SpectrumResult {
    pub fn total(&self) -> f64 {
        crate::sum::pairwise_sum(&self.probabilities)
    }

    /// Probabilities divided by their maximum.
    pub fn normalized(&self) -> Vec<f64> {
        let max = self.probabilities.iter().cloned().fold(0.0_f64, f64::max);
        if max == 0.0 {
            return vec![0.0; self.probabilities.len()];
        }
        self.probabilities.iter().map(|p| p / max).collect()
    }
}

/// Golden-rule decay time τ_F = ε / (2π η²) of the uniform model.
pub fn natural_units_timescale(epsilon: f64, eta: f64) -> Result<f64> {
    if !(epsilon > 0.0) {
        return domain(format!("oscillator spacing must be positive, got {epsilon}"));
    }
    if eta == 0.0 {
        return domain("zero coupling has an infinite golden-rule time");
    }
    Ok(epsilon / (2.0 * std::f64::consts::PI * eta * eta))
}

/// Natural-unit golden-rule linewidth 2π η² / ε (FWHM of the emission line).
pub fn natural_linewidth(epsilon: f64, eta: f64) -> Result<f64> {
    Ok(1.0 / natural_units_timescale(epsilon, eta)?)
}

/// Bridges natural units and SI: natural energies are multiples of an
/// oscillator spacing that corresponds to `epsilon_si` rad/s.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitBridge {
    pub epsilon_si: f64,
}

impl UnitBridge {
    pub fn frequency_to_si(&self, natural: f64) -> f64 {
        natural * self.epsilon_si
    }

    pub fn frequency_to_natural(&self, rad_per_s: f64) -> f64 {
        rad_per_s / self.epsilon_si
    }

    pub fn time_to_si(&self, natural: f64) -> f64 {
        natural / self.epsilon_si
    }

    pub fn time_to_natural(&self, seconds: f64) -> f64 {
        seconds * self.epsilon_si
    }
}

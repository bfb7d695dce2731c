//! Time evolution in the eigenbasis, phase-kick trains and two-atom runs.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use num_complex::Complex64;
use rayon::prelude::*;

use crate::arrowhead::{eigendecompose_bordered, EigenDecomposition};
use crate::error::{domain, Error, Result};
use crate::model::{ArrowheadHamiltonian, Basis, ModeSet, SpectrumResult, StateVector};

fn check_dim(state: &StateVector, eig: &EigenDecomposition) -> Result<()> {
    if state.dim() != eig.dim() {
        return Err(Error::DimensionMismatch { expected: eig.dim(), got: state.dim() });
    }
    Ok(())
}

pub fn to_eigen(state: &StateVector, eig: &EigenDecomposition) -> Result<StateVector> {
    check_dim(state, eig)?;
    match state.basis() {
        Basis::Eigen => Ok(state.clone()),
        Basis::Site => Ok(StateVector::new(eig.project(state.amplitudes()), Basis::Eigen)),
    }
}

pub fn to_site(state: &StateVector, eig: &EigenDecomposition) -> Result<StateVector> {
    check_dim(state, eig)?;
    match state.basis() {
        Basis::Site => Ok(state.clone()),
        Basis::Eigen => Ok(StateVector::new(eig.expand(state.amplitudes()), Basis::Site)),
    }
}

fn evolve_coefficients(c: &mut [Complex64], eigenvalues: &[f64], t: f64) {
    for (ci, &lam) in c.iter_mut().zip(eigenvalues) {
        *ci *= Complex64::from_polar(1.0, -lam * t);
    }
}

/// `U e^{-iΛt} U^T ψ`. A state given in the eigenbasis stays there.
pub fn propagate(state: &StateVector, eig: &EigenDecomposition, t: f64) -> Result<StateVector> {
    check_dim(state, eig)?;
    let mut c = to_eigen(state, eig)?.into_amplitudes();
    evolve_coefficients(&mut c, eig.eigenvalues(), t);
    match state.basis() {
        Basis::Eigen => Ok(StateVector::new(c, Basis::Eigen)),
        Basis::Site => Ok(StateVector::new(eig.expand(&c), Basis::Site)),
    }
}

/// Multiply the amplitudes of the first `atoms` sites by `e^{-iφ}`.
pub fn apply_phase_kick(state: &StateVector, phi: f64, atoms: usize) -> Result<StateVector> {
    state.require_site()?;
    if atoms > state.dim() {
        return domain("more atoms than basis states");
    }
    let mut out = state.clone();
    let phase = Complex64::from_polar(1.0, -phi);
    for a in &mut out.amplitudes_mut()[..atoms] {
        *a *= phase;
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KickSchedule {
    /// Kick angle, rad.
    pub phi: f64,
    /// Repetition interval τ_r.
    pub period: f64,
    /// Number of kicks, applied at `τ_r, 2τ_r, ...`.
    pub count: usize,
    /// Total evolution time.
    pub total: f64,
}

impl KickSchedule {
    pub fn new(phi: f64, period: f64, count: usize, total: f64) -> Result<Self> {
        let s = Self { phi, period, count, total };
        s.validate()?;
        Ok(s)
    }

    /// As many kicks as fit into `total`.
    pub fn filling(phi: f64, period: f64, total: f64) -> Result<Self> {
        if !(period > 0.0) {
            return domain("kick period must be positive");
        }
        Self::new(phi, period, (total / period + 1e-9).floor() as usize, total)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.period > 0.0 && self.period.is_finite()) {
            return domain("kick period must be positive");
        }
        if !self.phi.is_finite() {
            return domain("kick angle must be finite");
        }
        if self.count as f64 * self.period > self.total * (1.0 + 1e-12) {
            return domain("kicks extend beyond the total time");
        }
        Ok(())
    }
}

/// Samples of a kicked run: atomic populations right after each kick and at
/// the end, plus the final state.
#[derive(Debug, Clone)]
pub struct KickTrajectory {
    pub times: Vec<f64>,
    /// `populations[s][a]` is the population of atom `a` at `times[s]`.
    pub populations: Vec<Vec<f64>>,
    pub final_state: StateVector,
}

impl KickTrajectory {
    pub fn atom(&self, a: usize) -> Vec<f64> {
        self.populations.iter().map(|p| p[a]).collect()
    }
}

/// Alternate free evolution over `τ_r` and a kick, entirely in the
/// eigenbasis. A kick is a rank-`m` update through the atomic rows, so each
/// step costs O(N); only the final state is expanded to the site basis.
pub fn run_kick_sequence(
    eig: &EigenDecomposition,
    schedule: &KickSchedule,
    initial: &StateVector,
) -> Result<KickTrajectory> {
    schedule.validate()?;
    let mut c = to_eigen(initial, eig)?.into_amplitudes();
    let rows: Vec<&[f64]> = (0..eig.atoms()).map(|a| eig.atomic_row(a)).collect();
    let step: Vec<Complex64> =
        eig.eigenvalues().iter().map(|&lam| Complex64::from_polar(1.0, -lam * schedule.period)).collect();
    let factor = Complex64::from_polar(1.0, -schedule.phi) - 1.0;
    let atomic = |c: &[Complex64]| -> Vec<Complex64> {
        rows.iter().map(|r| r.iter().zip(c).fold(Complex64::new(0.0, 0.0), |acc, (&u, &x)| acc + x * u)).collect()
    };

    let mut times = Vec::with_capacity(schedule.count + 1);
    let mut populations = Vec::with_capacity(schedule.count + 1);
    for n in 1..=schedule.count {
        for (ci, s) in c.iter_mut().zip(&step) {
            *ci *= s;
        }
        let amps = atomic(&c);
        for (r, a) in rows.iter().zip(&amps) {
            let w = factor * a;
            for (ci, &u) in c.iter_mut().zip(r.iter()) {
                *ci += w * u;
            }
        }
        times.push(n as f64 * schedule.period);
        populations.push(atomic(&c).iter().map(|a| a.norm_sqr()).collect());
    }
    let rest = schedule.total - schedule.count as f64 * schedule.period;
    evolve_coefficients(&mut c, eig.eigenvalues(), rest);
    times.push(schedule.total);
    populations.push(atomic(&c).iter().map(|a| a.norm_sqr()).collect());
    let final_state = StateVector::new(eig.expand(&c), Basis::Site);
    Ok(KickTrajectory { times, populations, final_state })
}

/// Atomic populations of the kick-free evolution at arbitrary times.
pub fn free_populations(eig: &EigenDecomposition, initial: &StateVector, times: &[f64]) -> Result<Vec<Vec<f64>>> {
    let c0 = to_eigen(initial, eig)?.into_amplitudes();
    let lam = eig.eigenvalues();
    Ok(times
        .par_iter()
        .map(|&t| {
            (0..eig.atoms())
                .map(|a| {
                    let row = eig.atomic_row(a);
                    let mut acc = Complex64::new(0.0, 0.0);
                    for j in 0..lam.len() {
                        acc += c0[j] * Complex64::from_polar(row[j], -lam[j] * t);
                    }
                    acc.norm_sqr()
                })
                .collect()
        })
        .collect())
}

/// Fourier weights of the kicked phase `e^{-iφ ⌊t/τ_r⌋}`: components at
/// offsets `(φ + 2πn)/τ_r` with intensity `sinc²((φ + 2πn)/2)`, for
/// `n = -harmonics ..= harmonics`.
pub fn predicted_kick_spectrum(phi: f64, period: f64, harmonics: usize) -> Result<Vec<(f64, f64)>> {
    if harmonics < 1 {
        return domain("need at least one harmonic");
    }
    if !(period > 0.0) {
        return domain("kick period must be positive");
    }
    let h = harmonics as i64;
    Ok((-h..=h)
        .map(|n| {
            let x = phi + 2.0 * PI * n as f64;
            (x / period, sinc_squared(0.5 * x))
        })
        .collect())
}

fn sinc_squared(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        1.0 - x * x / 3.0
    } else {
        (x.sin() / x).powi(2)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitialState {
    /// First atom excited.
    Up,
    /// Second atom excited.
    Down,
    /// `(|10⟩ - |01⟩)/√2`.
    Singlet,
    /// `(|10⟩ + |01⟩)/√2`.
    Triplet,
}

impl InitialState {
    pub fn parse(tag: &str) -> Result<Self> {
        match tag {
            "10" | "|10>" => Ok(Self::Up),
            "01" | "|01>" => Ok(Self::Down),
            "s" | "|s>" => Ok(Self::Singlet),
            "t" | "|t>" => Ok(Self::Triplet),
            _ => domain(format!("unknown initial state '{tag}' (expected 10, 01, s or t)")),
        }
    }

    pub fn tag(&self) -> &'static str {
        match self {
            Self::Up => "10",
            Self::Down => "01",
            Self::Singlet => "s",
            Self::Triplet => "t",
        }
    }

    /// Amplitudes on the two atomic sites.
    pub fn atomic_amplitudes(&self) -> [f64; 2] {
        match self {
            Self::Up => [1.0, 0.0],
            Self::Down => [0.0, 1.0],
            Self::Singlet => [FRAC_1_SQRT_2, -FRAC_1_SQRT_2],
            Self::Triplet => [FRAC_1_SQRT_2, FRAC_1_SQRT_2],
        }
    }

    pub fn state(&self, dim: usize) -> StateVector {
        let mut amps = vec![Complex64::new(0.0, 0.0); dim];
        let [a, b] = self.atomic_amplitudes();
        amps[0] = Complex64::new(a, 0.0);
        amps[1] = Complex64::new(b, 0.0);
        StateVector::new(amps, Basis::Site)
    }
}

/// Two atoms on the uniform chain, natural units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoAtomSpec {
    pub delta1: f64,
    pub delta2: f64,
    /// Signed dipolar coupling.
    pub omega_d: f64,
    pub eta: f64,
    pub epsilon: f64,
    /// Oscillators at `k ε`, `1 <= |k| <= half_width`.
    pub half_width: usize,
    pub initial: InitialState,
}

impl TwoAtomSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0) {
            return domain("oscillator spacing must be positive");
        }
        if !(self.eta.is_finite() && self.delta1.is_finite() && self.delta2.is_finite() && self.omega_d.is_finite()) {
            return domain("two-atom parameters must be finite");
        }
        if self.half_width < 1 {
            return domain("need at least one oscillator on each side");
        }
        Ok(())
    }

    pub fn modes(&self) -> Result<ModeSet> {
        ModeSet::uniform_1d(self.half_width, self.epsilon, self.eta)
    }

    pub fn tau_f(&self) -> f64 {
        self.epsilon / (2.0 * PI * self.eta * self.eta)
    }
}

/// Head `[[δ1, ω_d], [ω_d, δ2]]`, both atoms coupled with `η` to every oscillator.
pub fn build_two_atom_hamiltonian(spec: &TwoAtomSpec) -> Result<ArrowheadHamiltonian> {
    spec.validate()?;
    let modes = spec.modes()?;
    let row = modes.couplings().to_vec();
    ArrowheadHamiltonian::new(
        vec![spec.delta1, spec.omega_d, spec.omega_d, spec.delta2],
        modes.offsets().to_vec(),
        vec![row.clone(), row],
    )
}

#[derive(Debug, Clone)]
pub struct TwoAtomRun {
    pub times: Vec<f64>,
    pub atom1: Vec<f64>,
    pub atom2: Vec<f64>,
    pub spectrum_time: f64,
    pub spectrum: SpectrumResult,
    pub final_state: StateVector,
}

pub fn run_two_atom(spec: &TwoAtomSpec, times: &[f64], spectrum_time: f64) -> Result<TwoAtomRun> {
    let h = build_two_atom_hamiltonian(spec)?;
    let eig = eigendecompose_bordered(&h)?;
    run_two_atom_with(spec, &eig, times, spectrum_time)
}

/// As [`run_two_atom`] with a precomputed decomposition of the same Hamiltonian.
pub fn run_two_atom_with(
    spec: &TwoAtomSpec,
    eig: &EigenDecomposition,
    times: &[f64],
    spectrum_time: f64,
) -> Result<TwoAtomRun> {
    let modes = spec.modes()?;
    if eig.dim() != modes.len() + 2 || eig.atoms() != 2 {
        return Err(Error::DimensionMismatch { expected: modes.len() + 2, got: eig.dim() });
    }
    let initial = spec.initial.state(eig.dim());
    let pops = free_populations(eig, &initial, times)?;
    let final_state = propagate(&initial, eig, spectrum_time)?;
    let probabilities = final_state.amplitudes()[2..].iter().map(|a| a.norm_sqr()).collect();
    Ok(TwoAtomRun {
        times: times.to_vec(),
        atom1: pops.iter().map(|p| p[0]).collect(),
        atom2: pops.iter().map(|p| p[1]).collect(),
        spectrum_time,
        spectrum: SpectrumResult { frequencies: modes.offsets().to_vec(), probabilities, angles: None },
        final_state,
    })
}

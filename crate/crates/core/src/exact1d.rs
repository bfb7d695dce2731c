//! Closed-form solution of the uniform pseudo-1D model.
//!
//! One atom at zero offset couples with strength `η` to oscillators at `l ε`,
//! `1 <= |l| <= L`. The eigenvalues of the infinite chain solve
//! `tan(π λ / ε) = (π η² / ε) λ / (λ² + η²)`, the atomic weight of eigenvector
//! `l` is `1 / (3 + (π η/ε)² + (λ_l/η)²)`, and the amplitudes are sums over
//! the truncated set of roots. All sums run over `|l|` ascending and use
//! pairwise summation.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::arrowhead::{build_symmetric_1d_hamiltonian, eigendecompose_arrowhead, EigenDecomposition};
use crate::error::{domain, Error, Result};
use crate::model::natural_units_timescale;
use crate::sum::{pairwise_sum, pairwise_sum_complex};

const ROOT_ITERATIONS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Exact1DConfig {
    pub epsilon: f64,
    pub eta: f64,
    /// Truncation index; `2 L + 1` states.
    pub half_width: usize,
}

impl Exact1DConfig {
    pub fn new(epsilon: f64, eta: f64, half_width: usize) -> Result<Self> {
        let cfg = Self { epsilon, eta, half_width };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return domain("oscillator spacing must be positive");
        }
        if !(self.eta > 0.0 && self.eta.is_finite()) {
            return domain("coupling must be positive");
        }
        if self.half_width < 1 {
            return domain("truncation index must be at least 1");
        }
        Ok(())
    }

    pub fn states(&self) -> usize {
        2 * self.half_width + 1
    }

    pub fn tau_f(&self) -> f64 {
        self.epsilon / (2.0 * PI * self.eta * self.eta)
    }

    /// `(π η / ε)²`.
    fn band(&self) -> f64 {
        let r = PI * self.eta / self.epsilon;
        r * r
    }
}

/// Positive roots of the tangent equation, stored as offsets from their poles.
#[derive(Debug, Clone)]
pub struct SecularRoots {
    epsilon: f64,
    /// `λ_k - k ε` for `k = 1..=L`, each in `(0, ε/2)`.
    offsets: Vec<f64>,
}

impl SecularRoots {
    pub fn half_width(&self) -> usize {
        self.offsets.len()
    }

    /// `λ_k` for signed `k`, with `λ_0 = 0` and `λ_{-k} = -λ_k`.
    pub fn get(&self, k: i64) -> f64 {
        match k {
            0 => 0.0,
            k if k > 0 => k as f64 * self.epsilon + self.offsets[k as usize - 1],
            k => -(self.get(-k)),
        }
    }

    /// `λ_k - k ε` for `k >= 1`.
    pub fn offset(&self, k: usize) -> f64 {
        self.offsets[k - 1]
    }

    /// `λ_l - j ε` without cancellation.
    fn distance(&self, l: i64, j: i64) -> f64 {
        match l {
            0 => -(j as f64) * self.epsilon,
            l if l > 0 => (l - j) as f64 * self.epsilon + self.offsets[l as usize - 1],
            l => (l - j) as f64 * self.epsilon - self.offsets[(-l) as usize - 1],
        }
    }

    /// All `2 L + 1` roots in ascending order.
    pub fn to_vec(&self) -> Vec<f64> {
        let l = self.half_width() as i64;
        (-l..=l).map(|k| self.get(k)).collect()
    }
}

/// Root in `(k ε, k ε + ε/2)`, solved in the angle form
/// `π x / ε = atan(R(k ε + x))`, which is monotone in `x`.
fn tangent_root(k: usize, epsilon: f64, eta: f64) -> Result<f64> {
    let c = PI * eta * eta / epsilon;
    let eta2 = eta * eta;
    let base = k as f64 * epsilon;
    let h = |x: f64| {
        let lam = base + x;
        let r = c * lam / (lam * lam + eta2);
        let dr = c * (eta2 - lam * lam) / ((lam * lam + eta2) * (lam * lam + eta2));
        (PI * x / epsilon - r.atan(), PI / epsilon - dr / (1.0 + r * r))
    };
    let (mut lo, mut hi) = (0.0, 0.5 * epsilon);
    let mut x = {
        let lam = base + 0.25 * epsilon;
        epsilon / PI * (c * lam / (lam * lam + eta2)).atan()
    };
    for _ in 0..ROOT_ITERATIONS {
        let (v, d) = h(x);
        if v == 0.0 {
            return Ok(x);
        }
        if v < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let mut next = x - v / d;
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - x).abs() <= 1e-15 * (base + next).abs().max(epsilon) || hi - lo <= 2.0 * f64::EPSILON * hi {
            return Ok(next);
        }
        x = next;
    }
    Err(Error::Convergence { lo: base + lo, hi: base + hi, iterations: ROOT_ITERATIONS })
}

/// `λ_0 = 0` plus the `2 L` nonzero roots, mirrored from the positive ones.
pub fn secular_roots(cfg: &Exact1DConfig) -> Result<SecularRoots> {
    cfg.validate()?;
    let offsets = (1..=cfg.half_width)
        .into_par_iter()
        .map(|k| tangent_root(k, cfg.epsilon, cfg.eta))
        .collect::<Result<Vec<f64>>>()?;
    Ok(SecularRoots { epsilon: cfg.epsilon, offsets })
}

/// Closed-form eigenvector of the infinite chain, evaluated on demand.
#[derive(Debug, Clone, Copy)]
pub struct EigvecCoefficients {
    k: i64,
    lambda: f64,
    offset: f64,
    atomic: f64,
    epsilon: f64,
    eta: f64,
}

impl EigvecCoefficients {
    pub fn eigenvalue(&self) -> f64 {
        self.lambda
    }

    /// `α_k^l`.
    pub fn coefficient(&self, l: i64) -> f64 {
        if l == 0 {
            return self.atomic;
        }
        let distance =
            if self.k == 0 { -(l as f64) * self.epsilon } else { (self.k - l) as f64 * self.epsilon + self.offset };
        self.eta / distance * self.atomic
    }
}

/// `α_k^l` as a function of `l`; `α_k^0` is taken positive.
pub fn eigvec_coefficients(cfg: &Exact1DConfig, k: i64) -> Result<EigvecCoefficients> {
    cfg.validate()?;
    if k.unsigned_abs() as usize > cfg.half_width {
        return domain(format!("index {k} outside the truncation window"));
    }
    let (lambda, offset, weight) = if k == 0 {
        (0.0, 0.0, 3.0 / (3.0 + cfg.band()))
    } else {
        let x = tangent_root(k.unsigned_abs() as usize, cfg.epsilon, cfg.eta)?;
        let x = if k > 0 { x } else { -x };
        let lambda = k as f64 * cfg.epsilon + x;
        (lambda, x, atomic_weight(cfg, lambda))
    };
    Ok(EigvecCoefficients { k, lambda, offset, atomic: weight.sqrt(), epsilon: cfg.epsilon, eta: cfg.eta })
}

/// `|α_l^0|²` for a nonzero root.
fn atomic_weight(cfg: &Exact1DConfig, lambda: f64) -> f64 {
    let r = lambda / cfg.eta;
    1.0 / (3.0 + cfg.band() + r * r)
}

/// Roots and atomic weights of one configuration, ready for amplitude sums.
#[derive(Debug, Clone)]
pub struct Exact1D {
    cfg: Exact1DConfig,
    roots: SecularRoots,
    /// `|α_0^0|²`.
    w0: f64,
    /// `|α_l^0|²` for `l = 1..=L` (even in `l`).
    weights: Vec<f64>,
}

impl Exact1D {
    pub fn new(cfg: Exact1DConfig) -> Result<Self> {
        let roots = secular_roots(&cfg)?;
        let weights = (1..=cfg.half_width as i64).map(|l| atomic_weight(&cfg, roots.get(l))).collect();
        Ok(Self { cfg, w0: 3.0 / (3.0 + cfg.band()), roots, weights })
    }

    pub fn config(&self) -> &Exact1DConfig {
        &self.cfg
    }

    pub fn roots(&self) -> &SecularRoots {
        &self.roots
    }

    /// Truncated sum of atomic weights, `|a_0(0)|`.
    pub fn truncated_norm(&self) -> f64 {
        self.survival_amplitude(0.0).re
    }

    /// `<Ψ_0| e^{-iHt} |Ψ_0>`. The ± pairs combine to `2 w_l cos(λ_l t)`, so
    /// the value is real.
    pub fn survival_amplitude(&self, t: f64) -> Complex64 {
        let mut terms = Vec::with_capacity(self.weights.len() + 1);
        terms.push(self.w0);
        terms.extend(self.weights.iter().enumerate().map(|(i, w)| 2.0 * w * (self.roots.get(i as i64 + 1) * t).cos()));
        Complex64::new(pairwise_sum(&terms), 0.0)
    }

    pub fn survival_probability(&self, t: f64) -> f64 {
        self.survival_amplitude(t).norm_sqr()
    }

    /// `e^{-i λ_l t}` weighted by `|α_l^0|²`, ordered `l = 0, 1, -1, 2, -2, ...`.
    fn weighted_phases(&self, t: f64) -> Vec<(i64, Complex64)> {
        let mut out = Vec::with_capacity(2 * self.weights.len() + 1);
        out.push((0, Complex64::new(self.w0, 0.0)));
        for (i, &w) in self.weights.iter().enumerate() {
            let l = i as i64 + 1;
            let phase = Complex64::from_polar(w, -self.roots.get(l) * t);
            out.push((l, phase));
            out.push((-l, phase.conj()));
        }
        out
    }

    fn emission_from(&self, phases: &[(i64, Complex64)], k: i64) -> Complex64 {
        let eta = self.cfg.eta;
        let terms: Vec<Complex64> = phases.iter().map(|&(l, p)| p * (eta / self.roots.distance(l, k))).collect();
        pairwise_sum_complex(&terms)
    }

    fn check_index(&self, k: i64) -> Result<()> {
        if k == 0 {
            return domain("the atomic index has no emission amplitude");
        }
        if k.unsigned_abs() as usize > self.cfg.half_width {
            return domain(format!("oscillator {k} outside the truncation window"));
        }
        Ok(())
    }

    /// `<Ψ_k| e^{-iHt} |Ψ_0>` for an oscillator `k != 0`.
    pub fn emission_amplitude(&self, k: i64, t: f64) -> Result<Complex64> {
        self.check_index(k)?;
        Ok(self.emission_from(&self.weighted_phases(t), k))
    }

    /// Emission amplitudes of many oscillators at one time, sharing the phases.
    pub fn emission_amplitudes(&self, ks: &[i64], t: f64) -> Result<Vec<Complex64>> {
        for &k in ks {
            self.check_index(k)?;
        }
        let phases = self.weighted_phases(t);
        Ok(ks.par_iter().map(|&k| self.emission_from(&phases, k)).collect())
    }

    /// `|a_0(t)|² - exp(-t/τ_F)`.
    pub fn golden_rule_deviation(&self, times: &[f64]) -> Result<Vec<f64>> {
        if times.iter().any(|t| !(*t >= 0.0)) {
            return domain("times must be non-negative");
        }
        let tau = self.cfg.tau_f();
        Ok(times.par_iter().map(|&t| self.survival_probability(t) - (-t / tau).exp()).collect())
    }
}

pub fn survival_amplitude(cfg: &Exact1DConfig, t: f64) -> Result<Complex64> {
    Ok(Exact1D::new(*cfg)?.survival_amplitude(t))
}

pub fn emission_amplitude(cfg: &Exact1DConfig, k: i64, t: f64) -> Result<Complex64> {
    Exact1D::new(*cfg)?.emission_amplitude(k, t)
}

pub fn golden_rule_deviation(cfg: &Exact1DConfig, times: &[f64]) -> Result<Vec<f64>> {
    Exact1D::new(*cfg)?.golden_rule_deviation(times)
}

/// The same chain diagonalized as a finite matrix: amplitudes come from the
/// normalized finite eigenvectors instead of the infinite-chain formulas.
#[derive(Debug, Clone)]
pub struct FiniteChain {
    cfg: Exact1DConfig,
    eig: EigenDecomposition,
}

impl FiniteChain {
    pub fn new(cfg: Exact1DConfig) -> Result<Self> {
        cfg.validate()?;
        let h = build_symmetric_1d_hamiltonian(cfg.half_width, cfg.epsilon, cfg.eta)?;
        Ok(Self { cfg, eig: eigendecompose_arrowhead(&h)? })
    }

    pub fn decomposition(&self) -> &EigenDecomposition {
        &self.eig
    }

    /// Site index of oscillator `k` in the ascending basis (atom first).
    pub fn site(&self, k: i64) -> usize {
        let l = self.cfg.half_width as i64;
        if k == 0 {
            0
        } else if k < 0 {
            (k + l + 1) as usize
        } else {
            (k + l) as usize
        }
    }

    /// Full state at time `t`, starting from the excited atom.
    pub fn state(&self, t: f64) -> Vec<Complex64> {
        let row = self.eig.atomic_row(0);
        let c: Vec<Complex64> =
            row.iter().zip(self.eig.eigenvalues()).map(|(&u, &lam)| Complex64::from_polar(u, -lam * t)).collect();
        self.eig.expand(&c)
    }

    pub fn survival_amplitude(&self, t: f64) -> Complex64 {
        let terms: Vec<Complex64> = self
            .eig
            .atomic_row(0)
            .iter()
            .zip(self.eig.eigenvalues())
            .map(|(&u, &lam)| Complex64::from_polar(u * u, -lam * t))
            .collect();
        pairwise_sum_complex(&terms)
    }

    pub fn emission_amplitude(&self, k: i64, t: f64) -> Complex64 {
        self.state(t)[self.site(k)]
    }
}

/// Golden-rule lifetime of a configuration.
pub fn tau_f(cfg: &Exact1DConfig) -> Result<f64> {
    natural_units_timescale(cfg.epsilon, cfg.eta)
}

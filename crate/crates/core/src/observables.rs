//! Populations, spectra, angular distributions, line fits and correlations.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{domain, Error, Result};
use crate::exact1d::Exact1D;
use crate::model::{ModeSet, SpectrumResult, StateVector};

pub const ANGULAR_BINS: usize = 60;
const FIT_MAX_ITERATIONS: usize = 500;
const FIT_TOLERANCE: f64 = 1e-10;
const MIXTURE_TRIGGER: f64 = 5.0;

pub fn excited_population(state: &StateVector, atom: usize) -> Result<f64> {
    state.require_site()?;
    state
        .amplitudes()
        .get(atom)
        .map(|a| a.norm_sqr())
        .ok_or_else(|| Error::Domain(format!("atom index {atom} out of range")))
}

fn oscillator_amplitudes<'a>(state: &'a StateVector, modes: &ModeSet) -> Result<&'a [Complex64]> {
    state.require_site()?;
    if state.dim() < modes.len() {
        return Err(Error::DimensionMismatch { expected: modes.len(), got: state.dim() });
    }
    Ok(&state.amplitudes()[state.dim() - modes.len()..])
}

/// `|a_k|²` per oscillator; the leading atomic sites are skipped.
pub fn spectrum(state: &StateVector, modes: &ModeSet) -> Result<SpectrumResult> {
    let amps = oscillator_amplitudes(state, modes)?;
    Ok(SpectrumResult {
        frequencies: modes.offsets().to_vec(),
        probabilities: amps.iter().map(|a| a.norm_sqr()).collect(),
        angles: modes.geometry().map(|g| g.iter().map(|m| m.theta).collect()),
    })
}

/// `(θ_k, |a_k|²)` per mode.
pub fn angular_distribution(state: &StateVector, modes: &ModeSet) -> Result<Vec<(f64, f64)>> {
    let Some(geometry) = modes.geometry() else {
        return domain("angular distribution needs mode geometry");
    };
    let amps = oscillator_amplitudes(state, modes)?;
    Ok(geometry.iter().zip(amps).map(|(g, a)| (g.theta, a.norm_sqr())).collect())
}

/// Probability per unit frequency in bins of `width` centered on integer
/// multiples of `width`, covering every mode; empty inner bins are kept.
pub fn binned_spectrum(spectrum: &SpectrumResult, width: f64) -> Result<SpectrumResult> {
    if !(width > 0.0 && width.is_finite()) {
        return domain("bin width must be positive");
    }
    if spectrum.frequencies.is_empty() {
        return domain("empty spectrum");
    }
    let index = |f: f64| (f / width).round() as i64;
    let (lo, hi) =
        spectrum.frequencies.iter().fold((i64::MAX, i64::MIN), |(a, b), &f| (a.min(index(f)), b.max(index(f))));
    let mut density = vec![0.0; (hi - lo + 1) as usize];
    for (&f, &p) in spectrum.frequencies.iter().zip(&spectrum.probabilities) {
        density[(index(f) - lo) as usize] += p / width;
    }
    Ok(SpectrumResult {
        frequencies: (lo..=hi).map(|i| i as f64 * width).collect(),
        probabilities: density,
        angles: None,
    })
}

/// One θ bin over `[0, π]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AngularBin {
    pub center: f64,
    pub probability: f64,
    /// Summed line-shape weight of the bin's modes.
    pub weight: f64,
    pub modes: usize,
}

impl AngularBin {
    /// Emitted probability per unit line-shape weight; follows the angular
    /// envelope independently of how many modes fall into the bin.
    pub fn envelope(&self) -> f64 {
        if self.weight > 0.0 {
            self.probability / self.weight
        } else {
            0.0
        }
    }
}

/// Bin per-mode probabilities by angle, each mode also contributing
/// `line(offset)` to the bin weight.
pub fn bin_angular(spectrum: &SpectrumResult, bins: usize, line: impl Fn(f64) -> f64) -> Result<Vec<AngularBin>> {
    let Some(angles) = &spectrum.angles else {
        return domain("angular binning needs mode angles");
    };
    if bins == 0 {
        return domain("need at least one bin");
    }
    let width = PI / bins as f64;
    let mut out: Vec<AngularBin> = (0..bins)
        .map(|b| AngularBin { center: (b as f64 + 0.5) * width, probability: 0.0, weight: 0.0, modes: 0 })
        .collect();
    for ((&theta, &p), &f) in angles.iter().zip(&spectrum.probabilities).zip(&spectrum.frequencies) {
        let b = ((theta / width) as usize).min(bins - 1);
        out[b].probability += p;
        out[b].weight += line(f);
        out[b].modes += 1;
    }
    Ok(out)
}

/// Least-squares `A sin²θ` through `(θ, y)`; returns `A` and the relative
/// residual `‖y - A sin²θ‖ / ‖y‖`.
pub fn fit_sin_squared(points: &[(f64, f64)]) -> Result<(f64, f64)> {
    let s4: f64 = points.iter().map(|(t, _)| t.sin().powi(4)).sum();
    let ys: f64 = points.iter().map(|(t, y)| y * t.sin().powi(2)).sum();
    let yy: f64 = points.iter().map(|(_, y)| y * y).sum();
    if !(s4 > 0.0 && yy > 0.0) {
        return domain("sin² fit needs nonzero data away from the poles");
    }
    let a = ys / s4;
    let r: f64 = points.iter().map(|(t, y)| (y - a * t.sin().powi(2)).powi(2)).sum();
    Ok((a, (r / yy).sqrt()))
}

/// `A (Γ/2)² / ((ω - ω_c)² + (Γ/2)²)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lorentzian {
    pub center: f64,
    pub fwhm: f64,
    pub height: f64,
}

impl Lorentzian {
    pub fn eval(&self, x: f64) -> f64 {
        let h = 0.5 * self.fwhm;
        self.height * h * h / ((x - self.center).powi(2) + h * h)
    }

    /// Integral over the real line, `π A Γ / 2`.
    pub fn area(&self) -> f64 {
        0.5 * PI * self.height * self.fwhm.abs()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LorentzianFit {
    pub line: Lorentzian,
    /// `‖y - model‖ / ‖y‖`.
    pub residual: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixtureFit {
    pub broad: Lorentzian,
    pub narrow: Lorentzian,
    pub residual: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LineFit {
    Single(LorentzianFit),
    /// Chosen when the single-line residual exceeds five times the mixture's.
    Mixture {
        single: LorentzianFit,
        mixture: MixtureFit,
    },
}

/// Damped Gauss-Newton (Levenberg-Marquardt) on a sum of Lorentzians with
/// parameters `[A, c, Γ]` per line, in data scaled to unit height and width.
struct Problem<'a> {
    x: &'a [f64],
    y: &'a [f64],
}

impl Problem<'_> {
    fn model(p: &[f64], x: f64) -> f64 {
        p.chunks(3)
            .map(|q| {
                let h = 0.5 * q[2];
                q[0] * h * h / ((x - q[1]).powi(2) + h * h)
            })
            .sum()
    }

    fn cost(&self, p: &[f64]) -> f64 {
        self.x.iter().zip(self.y).map(|(&x, &y)| (y - Self::model(p, x)).powi(2)).sum()
    }

    /// Normal equations `JᵀJ` and `Jᵀr`.
    fn normal(&self, p: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let n = p.len();
        // Fixed chunks summed in order keep the result independent of the
        // thread count.
        let partials: Vec<(Vec<f64>, Vec<f64>)> = self
            .x
            .par_chunks(1024)
            .zip(self.y.par_chunks(1024))
            .map(|(xs, ys)| {
                let mut a = vec![0.0; n * n];
                let mut b = vec![0.0; n];
                let mut g = vec![0.0; n];
                for (&x, &y) in xs.iter().zip(ys) {
                    for (l, q) in p.chunks(3).enumerate() {
                        let h = 0.5 * q[2];
                        let d = x - q[1];
                        let den = d * d + h * h;
                        let shape = h * h / den;
                        g[3 * l] = shape;
                        g[3 * l + 1] = q[0] * shape * 2.0 * d / den;
                        g[3 * l + 2] = q[0] * h * d * d / (den * den);
                    }
                    let r = y - Self::model(p, x);
                    for i in 0..n {
                        b[i] += g[i] * r;
                        for j in 0..n {
                            a[i * n + j] += g[i] * g[j];
                        }
                    }
                }
                (a, b)
            })
            .collect();
        let mut jtj = vec![0.0; n * n];
        let mut jtr = vec![0.0; n];
        for (a, b) in partials {
            jtj.iter_mut().zip(a).for_each(|(u, v)| *u += v);
            jtr.iter_mut().zip(b).for_each(|(u, v)| *u += v);
        }
        (jtj, jtr)
    }

    fn solve(&self, mut p: Vec<f64>) -> Result<(Vec<f64>, usize)> {
        let n = p.len();
        let mut cost = self.cost(&p);
        let mut lambda = 1e-3;
        for it in 1..=FIT_MAX_ITERATIONS {
            let (jtj, jtr) = self.normal(&p);
            loop {
                let mut a = nalgebra::DMatrix::from_row_slice(n, n, &jtj);
                for i in 0..n {
                    a[(i, i)] += lambda * jtj[i * n + i].max(1e-300);
                }
                let step = a
                    .lu()
                    .solve(&nalgebra::DVector::from_row_slice(&jtr))
                    .ok_or_else(|| Error::Fit(format!("singular normal equations at iteration {it}")))?;
                let trial: Vec<f64> = p.iter().zip(step.iter()).map(|(a, b)| a + b).collect();
                let trial_cost = self.cost(&trial);
                if trial_cost.is_finite() && trial_cost <= cost {
                    let change = step.iter().zip(&trial).map(|(s, v)| s.abs() / v.abs().max(1.0)).fold(0.0, f64::max);
                    p = trial;
                    cost = trial_cost;
                    lambda = (lambda * 0.3).max(1e-12);
                    if change < FIT_TOLERANCE {
                        return Ok((p, it));
                    }
                    break;
                }
                lambda *= 10.0;
                if lambda > 1e16 {
                    // No descent direction left: converged to rounding.
                    return Ok((p, it));
                }
            }
        }
        Err(Error::Fit(format!("no convergence in {FIT_MAX_ITERATIONS} iterations (parameters {p:?}, cost {cost:e})")))
    }
}

/// Scaled copy of the data: heights over the maximum, frequencies relative to
/// the argmax in units of the half-maximum width.
struct Scaled {
    x: Vec<f64>,
    y: Vec<f64>,
    x0: f64,
    xs: f64,
    ys: f64,
}

fn half_max_width(x: &[f64], y: &[f64], peak: usize) -> f64 {
    let half = 0.5 * y[peak];
    let mut lo = x[0];
    for i in (0..peak).rev() {
        if y[i] <= half {
            let t = (half - y[i]) / (y[i + 1] - y[i]);
            lo = x[i] + t * (x[i + 1] - x[i]);
            break;
        }
    }
    let mut hi = x[x.len() - 1];
    for i in peak + 1..x.len() {
        if y[i] <= half {
            let t = (y[i - 1] - half) / (y[i - 1] - y[i]);
            hi = x[i - 1] + t * (x[i] - x[i - 1]);
            break;
        }
    }
    hi - lo
}

fn prepare(spec: &SpectrumResult) -> Result<Scaled> {
    if spec.frequencies.len() != spec.probabilities.len() {
        return Err(Error::DimensionMismatch { expected: spec.frequencies.len(), got: spec.probabilities.len() });
    }
    if spec.frequencies.len() < 16 {
        return Err(Error::Fit(format!("need at least 16 points, got {}", spec.frequencies.len())));
    }
    let mut order: Vec<usize> = (0..spec.frequencies.len()).collect();
    order.sort_by(|&a, &b| spec.frequencies[a].total_cmp(&spec.frequencies[b]));
    let x: Vec<f64> = order.iter().map(|&i| spec.frequencies[i]).collect();
    let y: Vec<f64> = order.iter().map(|&i| spec.probabilities[i]).collect();
    let peak = (0..y.len()).fold(0, |m, i| if y[i] > y[m] { i } else { m });
    let ys = y[peak];
    if !(ys > 0.0 && ys.is_finite()) {
        return Err(Error::Fit("spectrum has no positive peak".into()));
    }
    let mut width = half_max_width(&x, &y, peak);
    if !(width > 0.0) {
        width = (x[x.len() - 1] - x[0]) / x.len() as f64;
    }
    let x0 = x[peak];
    Ok(Scaled {
        x: x.iter().map(|v| (v - x0) / width).collect(),
        y: y.iter().map(|v| v / ys).collect(),
        x0,
        xs: width,
        ys,
    })
}

impl Scaled {
    fn unscale(&self, q: &[f64]) -> Lorentzian {
        Lorentzian { height: q[0] * self.ys, center: self.x0 + q[1] * self.xs, fwhm: q[2].abs() * self.xs }
    }

    fn residual(&self, p: &[f64]) -> f64 {
        let yy: f64 = self.y.iter().map(|v| v * v).sum();
        (Problem { x: &self.x, y: &self.y }.cost(p) / yy).sqrt()
    }
}

/// Single-Lorentzian fit started at the argmax with the half-maximum width.
pub fn lorentzian_fwhm_fit(spec: &SpectrumResult) -> Result<LorentzianFit> {
    let s = prepare(spec)?;
    let (p, iterations) = Problem { x: &s.x, y: &s.y }.solve(vec![1.0, 0.0, 1.0])?;
    Ok(LorentzianFit { line: s.unscale(&p), residual: s.residual(&p), iterations })
}

/// Two-Lorentzian fit: the single fit seeds the broad line, the largest
/// remaining excess seeds the narrow one.
pub fn lorentzian_mixture_fit(spec: &SpectrumResult) -> Result<MixtureFit> {
    let s = prepare(spec)?;
    let prob = Problem { x: &s.x, y: &s.y };
    let (single, _) = prob.solve(vec![1.0, 0.0, 1.0])?;
    let excess: Vec<f64> = s.x.iter().zip(&s.y).map(|(&x, &y)| y - Problem::model(&single, x)).collect();
    let peak = (0..excess.len()).fold(0, |m, i| if excess[i] > excess[m] { i } else { m });
    let narrow_width = half_max_width(&s.x, &excess, peak).max(1e-3);
    let start = [single[0], single[1], single[2], excess[peak].max(1e-6), s.x[peak], narrow_width];
    let (p, iterations) = prob.solve(start.to_vec())?;
    let (a, b) = (s.unscale(&p[..3]), s.unscale(&p[3..]));
    let (broad, narrow) = if a.fwhm >= b.fwhm { (a, b) } else { (b, a) };
    Ok(MixtureFit { broad, narrow, residual: s.residual(&p), iterations })
}

/// Single line, or the two-line mixture when it explains the data five
/// times better.
pub fn fit_line(spec: &SpectrumResult) -> Result<LineFit> {
    let single = lorentzian_fwhm_fit(spec)?;
    match lorentzian_mixture_fit(spec) {
        Ok(mixture) if single.residual > MIXTURE_TRIGGER * mixture.residual => Ok(LineFit::Mixture { single, mixture }),
        _ => Ok(LineFit::Single(single)),
    }
}

/// `2 Re(a_j a_k*)`.
pub fn correlations(state: &StateVector, j: usize, k: usize) -> Result<f64> {
    state.require_site()?;
    let a = state.amplitudes();
    if j >= a.len() || k >= a.len() {
        return domain("correlation index out of range");
    }
    Ok(pair_correlation(a[j], a[k]))
}

fn pair_correlation(a: Complex64, b: Complex64) -> f64 {
    2.0 * (a * b.conj()).re
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationSeries {
    pub pair: (i64, i64),
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    /// `c_jk / (|a_j| |a_k|)`, zero where either amplitude vanishes.
    pub normalized: Vec<f64>,
    pub populations: Vec<(f64, f64)>,
}

impl CorrelationSeries {
    fn from_amplitudes(pair: (i64, i64), times: &[f64], amps: &[(Complex64, Complex64)]) -> Self {
        let values = amps.iter().map(|&(a, b)| pair_correlation(a, b)).collect();
        let normalized = amps
            .iter()
            .map(|&(a, b)| {
                let d = a.norm() * b.norm();
                if d > 0.0 {
                    pair_correlation(a, b) / d
                } else {
                    0.0
                }
            })
            .collect();
        let populations = amps.iter().map(|(a, b)| (a.norm_sqr(), b.norm_sqr())).collect();
        Self { pair, times: times.to_vec(), values, normalized, populations }
    }
}

/// Correlations along the unperturbed decay of the pseudo-1D chain; index 0
/// is the atom, nonzero indices are oscillators.
pub fn correlation_series(exact: &Exact1D, pairs: &[(i64, i64)], times: &[f64]) -> Result<Vec<CorrelationSeries>> {
    let mut sites: Vec<i64> = pairs.iter().flat_map(|&(a, b)| [a, b]).filter(|&k| k != 0).collect();
    sites.sort();
    sites.dedup();
    // amplitude table [time][site]
    let table: Vec<(Complex64, Vec<Complex64>)> = times
        .iter()
        .map(|&t| Ok((exact.survival_amplitude(t), exact.emission_amplitudes(&sites, t)?)))
        .collect::<Result<_>>()?;
    let lookup = |row: &(Complex64, Vec<Complex64>), k: i64| {
        if k == 0 {
            row.0
        } else {
            row.1[sites.binary_search(&k).unwrap()]
        }
    };
    Ok(pairs
        .iter()
        .map(|&(j, k)| {
            let amps: Vec<(Complex64, Complex64)> = table.iter().map(|row| (lookup(row, j), lookup(row, k))).collect();
            CorrelationSeries::from_amplitudes((j, k), times, &amps)
        })
        .collect())
}

/// Correlations along stored site-basis states.
pub fn correlation_series_from_states(
    states: &[StateVector],
    times: &[f64],
    pairs: &[(usize, usize)],
) -> Result<Vec<CorrelationSeries>> {
    if states.len() != times.len() {
        return Err(Error::DimensionMismatch { expected: times.len(), got: states.len() });
    }
    for s in states {
        s.require_site()?;
    }
    pairs
        .iter()
        .map(|&(j, k)| {
            let amps = states
                .iter()
                .map(|s| {
                    let a = s.amplitudes();
                    if j >= a.len() || k >= a.len() {
                        return domain("correlation index out of range");
                    }
                    Ok((a[j], a[k]))
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(CorrelationSeries::from_amplitudes((j as i64, k as i64), times, &amps))
        })
        .collect()
}

/// Lifetime from a straight-line fit of `ln P` against `t`, using only
/// samples with `lo <= P <= hi`.
pub fn fit_exponential_lifetime(times: &[f64], populations: &[f64], lo: f64, hi: f64) -> Result<f64> {
    let pts: Vec<(f64, f64)> =
        times.iter().zip(populations).filter(|(_, &p)| p >= lo && p <= hi).map(|(&t, &p)| (t, p.ln())).collect();
    if pts.len() < 3 {
        return Err(Error::Fit(format!("only {} samples inside [{lo}, {hi}]", pts.len())));
    }
    let n = pts.len() as f64;
    let mt = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|(t, y)| (t - mt) * (y - my)).sum();
    let sxx: f64 = pts.iter().map(|(t, _)| (t - mt).powi(2)).sum();
    let slope = sxy / sxx;
    if !(slope < 0.0) {
        return Err(Error::Fit(format!("population does not decay (slope {slope:e})")));
    }
    Ok(-1.0 / slope)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Basis;

    #[test]
    fn diagonal_correlation_is_twice_the_population() {
        let s = StateVector::new(vec![Complex64::new(0.3, 0.4), Complex64::new(0.0, 0.1)], Basis::Site);
        assert!((correlations(&s, 0, 0).unwrap() - 2.0 * 0.25).abs() < 1e-15);
        assert_eq!(correlations(&s, 0, 1).unwrap(), correlations(&s, 1, 0).unwrap());
    }

    #[test]
    fn binned_spectrum_conserves_probability() {
        let s = SpectrumResult {
            frequencies: vec![-1.2, -0.9, 0.1, 0.2, 2.6],
            probabilities: vec![0.1, 0.2, 0.3, 0.15, 0.25],
            angles: None,
        };
        let b = binned_spectrum(&s, 0.5).unwrap();
        assert_eq!(b.frequencies, vec![-1.0, -0.5, 0.0, 0.5, 1.0, 1.5, 2.0, 2.5]);
        assert!((b.total() * 0.5 - s.total()).abs() < 1e-15);
        assert!((b.probabilities[0] - 0.6).abs() < 1e-15);
        assert_eq!(b.probabilities[3], 0.0);
    }

    #[test]
    fn lorentzian_area() {
        let l = Lorentzian { center: 0.0, fwhm: 2.0, height: 3.0 };
        assert!((l.area() - 3.0 * PI).abs() < 1e-15);
        assert_eq!(l.eval(1.0), 1.5);
    }

    #[test]
    fn exponential_fit_recovers_lifetime() {
        let t: Vec<f64> = (0..100).map(|i| i as f64 * 0.1).collect();
        let p: Vec<f64> = t.iter().map(|t| (-t / 1.7f64).exp()).collect();
        let tau = fit_exponential_lifetime(&t, &p, 0.02, 0.6).unwrap();
        assert!((tau - 1.7).abs() < 1e-12);
    }

    #[test]
    fn fit_needs_enough_points() {
        let s = SpectrumResult { frequencies: vec![0.0; 5], probabilities: vec![1.0; 5], angles: None };
        assert!(lorentzian_fwhm_fit(&s).is_err());
    }
}

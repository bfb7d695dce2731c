//! The four experiments. Each returns its tables and a results summary;
//! [`crate::run`] writes them out.

use std::path::Path;

use emission_core::arrowhead::{
    build_symmetric_1d_hamiltonian, eigendecompose_arrowhead_capped, eigendecompose_bordered_capped,
};
use emission_core::box3d::{enumerate_modes, golden_rule_rate_in_shell, HydrogenParams};
use emission_core::dynamics::{
    build_two_atom_hamiltonian, free_populations, predicted_kick_spectrum, propagate, run_kick_sequence,
    run_two_atom_with, KickSchedule,
};
use emission_core::exact1d::Exact1D;
use emission_core::model::{ArrowheadHamiltonian, SpectrumResult, StateVector};
use emission_core::observables::{
    bin_angular, binned_spectrum, fit_exponential_lifetime, fit_line, fit_sin_squared, lorentzian_fwhm_fit, spectrum,
    LineFit, Lorentzian,
};
use serde_json::{json, Value};

use crate::cache::{self, CacheStatus};
use crate::config::{Box3dRun, Exact1dRun, KicksRun, TwoAtomRun};
use crate::error::{CliError, CliResult};
use crate::output::Table;

/// Tables to write, a results summary and the cache outcome.
#[derive(Debug, Clone)]
pub struct Report {
    pub tables: Vec<(&'static str, Table)>,
    pub results: Value,
    pub cache: Vec<CacheStatus>,
}

/// Window used by the lifetime fits, in population.
pub const LIFETIME_FIT_RANGE: (f64, f64) = (0.02, 0.6);
/// Modes closer than this to the dipole axis (in `sin²θ`) are left out of
/// the envelope fit.
pub const MIN_SIN_SQUARED: f64 = 0.05;
/// Resolution of the binned box spectrum, bins per Einstein A.
pub const ENVELOPE_BINS_PER_A: f64 = 4.0;

fn fit_summary(fit: &LineFit, scale: f64) -> Value {
    let line = |l: &Lorentzian| json!({ "center": l.center / scale, "fwhm": l.fwhm / scale, "area": l.area() / scale });
    match fit {
        LineFit::Single(s) => json!({ "kind": "single", "line": line(&s.line), "residual": s.residual }),
        LineFit::Mixture { single, mixture } => json!({
            "kind": "mixture",
            "single": line(&single.line),
            "single_residual": single.residual,
            "broad": line(&mixture.broad),
            "narrow": line(&mixture.narrow),
            "residual": mixture.residual,
        }),
    }
}

pub fn exact1d(run: &Exact1dRun) -> CliResult<Report> {
    let exact = Exact1D::new(run.system)?;
    let tau = run.system.tau_f();
    let gamma = 1.0 / tau;
    let times = run.grid.times();
    let deviation = exact.golden_rule_deviation(&times)?;
    let mut population = Table::new(
        "exact1d population",
        &[("t", "natural"), ("t/tau_F", "1"), ("P_excited", "1"), ("P_golden_rule", "1"), ("deviation", "1")],
    );
    for (&t, &d) in times.iter().zip(&deviation) {
        let golden = (-t / tau).exp();
        population.push(vec![t, t / tau, golden + d, golden, d]);
    }

    let w = run.half_window as i64;
    let ks: Vec<i64> = (-w..=w).step_by(run.stride).filter(|&k| k != 0).collect();
    let amps = exact.emission_amplitudes(&ks, run.spectrum_time)?;
    let eps = run.system.epsilon;
    let spec = SpectrumResult {
        frequencies: ks.iter().map(|&k| k as f64 * eps).collect(),
        probabilities: amps.iter().map(|a| a.norm_sqr()).collect(),
        angles: None,
    };
    let mut table =
        Table::new("exact1d spectrum", &[("offset", "natural"), ("offset/gamma", "1"), ("probability", "1")]);
    for (&f, &p) in spec.frequencies.iter().zip(&spec.probabilities) {
        table.push(vec![f, f / gamma, p]);
    }
    let fit = lorentzian_fwhm_fit(&spec)?;
    let max_dev = deviation.iter().fold(0.0f64, |m, d| m.max(d.abs()));
    let results = json!({
        "states": run.system.states(),
        "tau_F": tau,
        "max_abs_deviation": max_dev,
        "truncation_deficit": 1.0 - exact.survival_probability(0.0),
        "spectrum_time_over_tau_F": run.spectrum_time / tau,
        "spectrum_total": spec.total(),
        "fitted_fwhm_over_gamma": fit.line.fwhm / gamma,
        "fitted_center_over_gamma": fit.line.center / gamma,
    });
    Ok(Report { tables: vec![("population.csv", population), ("spectrum.csv", table)], results, cache: vec![] })
}

fn single_atom_decomposition(
    h: &ArrowheadHamiltonian,
    dir: Option<&Path>,
) -> CliResult<(emission_core::arrowhead::EigenDecomposition, CacheStatus)> {
    let cap = h.dim();
    cache::decomposition(h, dir, |h| eigendecompose_arrowhead_capped(h, cap))
}

pub fn box3d(run: &Box3dRun, cache_dir: Option<&Path>) -> CliResult<Report> {
    let modes = enumerate_modes(&run.spec)?;
    if modes.len() > run.max_modes {
        return Err(CliError::config(format!(
            "the shell holds {} modes, above box.max_modes = {}; refusing to run",
            modes.len(),
            run.max_modes
        )));
    }
    let hydrogen = HydrogenParams::lyman_alpha();
    let a = hydrogen.einstein_a;
    let h = ArrowheadHamiltonian::single_atom(0.0, &modes)?;
    let (eig, status) = single_atom_decomposition(&h, cache_dir)?;
    let initial = StateVector::basis_state(h.dim(), 0);

    let times = run.grid.times();
    let pops: Vec<f64> = free_populations(&eig, &initial, &times)?.into_iter().map(|p| p[0]).collect();
    let mut population =
        Table::new("box3d population", &[("t", "s"), ("t*A", "1"), ("P_excited", "1"), ("exp(-A t)", "1")]);
    for (&t, &p) in times.iter().zip(&pops) {
        population.push(vec![t, t * a, p, (-a * t).exp()]);
    }
    let lifetime = fit_exponential_lifetime(&times, &pops, LIFETIME_FIT_RANGE.0, LIFETIME_FIT_RANGE.1).ok();

    let state = propagate(&initial, &eig, run.spectrum_time)?;
    let spec = spectrum(&state, &modes)?;
    let angles = spec.angles.clone().unwrap_or_default();
    let mut table =
        Table::new("box3d spectrum", &[("offset", "rad/s"), ("offset/A", "1"), ("probability", "1"), ("theta", "rad")]);
    for ((&f, &p), &th) in spec.frequencies.iter().zip(&spec.probabilities).zip(&angles) {
        table.push(vec![f, f / a, p, th]);
    }

    // Emitted probability per frequency interval, four bins per linewidth.
    let line_fit = lorentzian_fwhm_fit(&binned_spectrum(&spec, ENVELOPE_BINS_PER_A.recip() * a)?)?;
    // Per-mode fit with the angular factor divided out, reported for comparison.
    let mut envelope = SpectrumResult { frequencies: vec![], probabilities: vec![], angles: None };
    for ((&f, &p), &th) in spec.frequencies.iter().zip(&spec.probabilities).zip(&angles) {
        let s2 = th.sin().powi(2);
        if s2 >= MIN_SIN_SQUARED {
            envelope.frequencies.push(f);
            envelope.probabilities.push(p / s2);
        }
    }
    let per_mode = lorentzian_fwhm_fit(&envelope)?;
    let line = Lorentzian { height: 1.0, ..line_fit.line };
    let bins = bin_angular(&spec, run.bins, |f| line.eval(f))?;
    let points: Vec<(f64, f64)> = bins.iter().filter(|b| b.modes > 0).map(|b| (b.center, b.envelope())).collect();
    let (amplitude, residual) = fit_sin_squared(&points)?;
    let mut angular = Table::new(
        "box3d angular distribution",
        &[("theta_center", "rad"), ("probability", "1"), ("modes", "count"), ("envelope", "1"), ("sin2_fit", "1")],
    );
    for b in &bins {
        angular.push(vec![b.center, b.probability, b.modes as f64, b.envelope(), amplitude * b.center.sin().powi(2)]);
    }

    let results = json!({
        "preset": run.preset,
        "modes": modes.len(),
        "einstein_a": a,
        "reference_lifetime_s": hydrogen.lifetime,
        "golden_rule_rate_over_a": golden_rule_rate_in_shell(&modes, &run.spec)? / a,
        "fitted_lifetime_s": lifetime,
        "fitted_lifetime_over_reference": lifetime.map(|t| t / hydrogen.lifetime),
        "spectrum_time_s": run.spectrum_time,
        "spectrum_total": spec.total(),
        "envelope_fwhm_over_a": line_fit.line.fwhm / a,
        "envelope_center_over_a": line_fit.line.center / a,
        "per_mode_fwhm_over_a": per_mode.line.fwhm / a,
        "per_mode_center_over_a": per_mode.line.center / a,
        "angular_sin2_residual": residual,
    });
    Ok(Report {
        tables: vec![("population.csv", population), ("spectrum.csv", table), ("angular.csv", angular)],
        results,
        cache: vec![status],
    })
}

/// Offset of the largest probability with `lo < offset < hi`.
pub fn dominant_offset(frequencies: &[f64], probabilities: &[f64], lo: f64, hi: f64) -> Option<f64> {
    frequencies
        .iter()
        .zip(probabilities)
        .filter(|(f, _)| **f > lo && **f < hi)
        .fold(None, |best: Option<(f64, f64)>, (&f, &p)| match best {
            Some((_, bp)) if bp >= p => best,
            _ => Some((f, p)),
        })
        .map(|b| b.0)
}

pub fn kicks(run: &KicksRun, cache_dir: Option<&Path>) -> CliResult<Report> {
    let n = run.scales;
    let gamma = n.gamma();
    let tau = n.tau_f();
    let h = build_symmetric_1d_hamiltonian(run.half_width, n.epsilon, n.eta)?;
    let (eig, status) = single_atom_decomposition(&h, cache_dir)?;
    let initial = StateVector::basis_state(h.dim(), 0);
    let s = &run.schedule;
    let kicked = run_kick_sequence(&eig, s, &initial)?;
    let free = run_kick_sequence(&eig, &KickSchedule::new(0.0, s.period, s.count, s.total)?, &initial)?;

    let mut population = Table::new(
        "kicks population",
        &[("t", "natural"), ("t/tau_F", "1"), ("P_kicked", "1"), ("P_free", "1"), ("difference", "1")],
    );
    let mut max_diff = 0.0f64;
    for ((&t, pk), pf) in kicked.times.iter().zip(&kicked.populations).zip(&free.populations) {
        max_diff = max_diff.max((pk[0] - pf[0]).abs());
        population.push(vec![t, t / tau, pk[0], pf[0], pk[0] - pf[0]]);
    }

    let freqs = h.diag().to_vec();
    let probs: Vec<f64> = kicked.final_state.amplitudes()[1..].iter().map(|a| a.norm_sqr()).collect();
    let mut table = Table::new("kicks spectrum", &[("offset", "natural"), ("offset/gamma", "1"), ("probability", "1")]);
    for (&f, &p) in freqs.iter().zip(&probs) {
        table.push(vec![f, f / gamma, p]);
    }
    let predicted = predicted_kick_spectrum(s.phi, s.period, run.harmonics)?;
    let mut pred = Table::new("kicks predicted", &[("offset", "natural"), ("offset/gamma", "1"), ("weight", "1")]);
    for &(f, w) in &predicted {
        pred.push(vec![f, f / gamma, w]);
    }
    let inf = f64::INFINITY;
    let results = json!({
        "kicks": s.count,
        "period_over_tau_F": s.period / tau,
        "phi_rad": s.phi,
        "max_population_difference": max_diff,
        "dominant_offset": dominant_offset(&freqs, &probs, -inf, inf),
        "dominant_positive_offset": dominant_offset(&freqs, &probs, 0.0, inf),
        "dominant_negative_offset": dominant_offset(&freqs, &probs, -inf, 0.0),
        "predicted_main_offset": s.phi / s.period,
        "band_edge": run.half_width as f64 * n.epsilon,
    });
    Ok(Report {
        tables: vec![("spectrum.csv", table), ("predicted.csv", pred), ("population.csv", population)],
        results,
        cache: vec![status],
    })
}

pub fn two_atom(run: &TwoAtomRun, cache_dir: Option<&Path>) -> CliResult<Report> {
    let spec = &run.spec;
    let gamma = run.scales().gamma();
    let tau = spec.tau_f();
    let h = build_two_atom_hamiltonian(spec)?;
    let cap = h.dim();
    let (eig, status) = cache::decomposition(&h, cache_dir, |h| eigendecompose_bordered_capped(h, cap))?;
    let times = run.grid.times();
    let out = run_two_atom_with(spec, &eig, &times, run.spectrum_time)?;

    let single = build_symmetric_1d_hamiltonian(spec.half_width, spec.epsilon, spec.eta)?;
    let (single_eig, single_status) = single_atom_decomposition(&single, cache_dir)?;
    let reference = free_populations(&single_eig, &StateVector::basis_state(single.dim(), 0), &times)?;

    let mut population = Table::new(
        "two-atom populations",
        &[("t", "natural"), ("t/tau_F", "1"), ("P_atom1", "1"), ("P_atom2", "1"), ("P_single_reference", "1")],
    );
    for i in 0..times.len() {
        population.push(vec![times[i], times[i] / tau, out.atom1[i], out.atom2[i], reference[i][0]]);
    }
    let mut table =
        Table::new("two-atom spectrum", &[("offset", "natural"), ("offset/gamma", "1"), ("probability", "1")]);
    for (&f, &p) in out.spectrum.frequencies.iter().zip(&out.spectrum.probabilities) {
        table.push(vec![f, f / gamma, p]);
    }
    let total = out.spectrum.total();
    let fit = if total > 1e-12 { Some(fit_summary(&fit_line(&out.spectrum)?, gamma)) } else { None };
    let results = json!({
        "initial": spec.initial.tag(),
        "delta1_over_gamma": spec.delta1 / gamma,
        "delta2_over_gamma": spec.delta2 / gamma,
        "omega_d_over_gamma": spec.omega_d / gamma,
        "final_p_atom1": out.atom1.last(),
        "final_p_atom2": out.atom2.last(),
        "spectrum_time_over_tau_F": run.spectrum_time / tau,
        "spectrum_total": total,
        "line_fit": fit,
    });
    Ok(Report {
        tables: vec![("populations.csv", population), ("spectrum.csv", table)],
        results,
        cache: vec![status, single_status],
    })
}

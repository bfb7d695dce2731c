use std::f64::consts::{FRAC_1_SQRT_2, PI};

use emission_core::arrowhead::{
    build_symmetric_1d_hamiltonian, dense_eig_oracle, eigendecompose_arrowhead, eigendecompose_bordered,
};
use emission_core::dynamics::*;
use emission_core::exact1d::{Exact1DConfig, FiniteChain};
use emission_core::model::{Basis, StateVector};
use num_complex::Complex64;
use proptest::prelude::*;

fn tau_f(eta: f64) -> f64 {
    1.0 / (2.0 * PI * eta * eta)
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

#[test]
fn propagation_at_time_zero_is_identity() {
    let h = build_symmetric_1d_hamiltonian(100, 1.0, 1.7).unwrap();
    let eig = eigendecompose_arrowhead(&h).unwrap();
    let s = StateVector::basis_state(h.dim(), 0);
    let out = propagate(&s, &eig, 0.0).unwrap();
    for (a, b) in out.amplitudes().iter().zip(s.amplitudes()) {
        assert!((a - b).norm() < 1e-13);
    }
}

#[test]
fn propagation_rejects_wrong_dimension() {
    let h = build_symmetric_1d_hamiltonian(10, 1.0, 1.0).unwrap();
    let eig = eigendecompose_arrowhead(&h).unwrap();
    assert!(propagate(&StateVector::basis_state(5, 0), &eig, 1.0).is_err());
}

#[test]
fn chain_propagation_matches_the_exact_finite_chain_and_dense_oracle() {
    let (eta, l) = (2.4, 100);
    let h = build_symmetric_1d_hamiltonian(l, 1.0, eta).unwrap();
    let eig = eigendecompose_arrowhead(&h).unwrap();
    let dense = dense_eig_oracle(&h).unwrap();
    let chain = FiniteChain::new(Exact1DConfig::new(1.0, eta, l).unwrap()).unwrap();
    let s = StateVector::basis_state(h.dim(), 0);
    for i in 0..50 {
        let t = 8.0 * tau_f(eta) * i as f64 / 49.0;
        let a = propagate(&s, &eig, t).unwrap();
        let b = propagate(&s, &dense, t).unwrap();
        let p = a.amplitudes()[0].norm_sqr();
        assert!((p - chain.survival_amplitude(t).norm_sqr()).abs() < 1e-10);
        assert!((p - b.amplitudes()[0].norm_sqr()).abs() < 1e-10);
        assert!((a.norm_sqr() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn norm_drift_over_a_thousand_operations() {
    let h = build_symmetric_1d_hamiltonian(200, 1.0, 2.0).unwrap();
    let eig = eigendecompose_arrowhead(&h).unwrap();
    let mut s = StateVector::basis_state(h.dim(), 0);
    for i in 0..500 {
        s = propagate(&s, &eig, 0.003 * (1 + i % 7) as f64).unwrap();
        s = apply_phase_kick(&s, 0.1 * i as f64, 1).unwrap();
    }
    assert!((s.norm_sqr() - 1.0).abs() < 1e-10);
}

#[test]
fn eigenbasis_kicks_match_alternating_site_operations() {
    let (eta, l) = (1.5, 120);
    let h = build_symmetric_1d_hamiltonian(l, 1.0, eta).unwrap();
    let eig = eigendecompose_arrowhead(&h).unwrap();
    let init = StateVector::basis_state(h.dim(), 0);
    let sched = KickSchedule::new(2.0, tau_f(eta) / 7.0, 20, 3.3 * tau_f(eta)).unwrap();
    let fast = run_kick_sequence(&eig, &sched, &init).unwrap();
    let mut s = init.clone();
    for n in 0..sched.count {
        s = propagate(&s, &eig, sched.period).unwrap();
        s = apply_phase_kick(&s, sched.phi, 1).unwrap();
        assert!((s.amplitudes()[0].norm_sqr() - fast.populations[n][0]).abs() < 1e-12);
    }
    s = propagate(&s, &eig, sched.total - sched.count as f64 * sched.period).unwrap();
    for (a, b) in s.amplitudes().iter().zip(fast.final_state.amplitudes()) {
        assert!((a - b).norm() < 1e-10);
    }
}

#[test]
fn zero_angle_kicks_reproduce_free_decay() {
    let (eta, l) = (2.4, 500);
    let h = build_symmetric_1d_hamiltonian(l, 1.0, eta).unwrap();
    let eig = eigendecompose_arrowhead(&h).unwrap();
    let init = StateVector::basis_state(h.dim(), 0);
    let sched = KickSchedule::filling(0.0, tau_f(eta) / 25.0, 4.0 * tau_f(eta)).unwrap();
    let run = run_kick_sequence(&eig, &sched, &init).unwrap();
    let free = free_populations(&eig, &init, &run.times).unwrap();
    let free: Vec<f64> = free.iter().map(|p| p[0]).collect();
    assert!(max_diff(&run.atom(0), &free) < 1e-12);
}

#[test]
fn kick_effect_on_population_shrinks_as_the_band_widens() {
    // Components (φ + 2πn)/τ_r outside the band cannot decay; their weight
    // falls as the band covers more harmonics.
    let eta = 1.0;
    let tau = tau_f(eta);
    let mut diffs = Vec::new();
    for l in [1000usize, 2000, 4000] {
        let h = build_symmetric_1d_hamiltonian(l, 1.0, eta).unwrap();
        let eig = eigendecompose_arrowhead(&h).unwrap();
        let init = StateVector::basis_state(h.dim(), 0);
        let kicked =
            run_kick_sequence(&eig, &KickSchedule::filling(PI, tau / 25.0, 6.0 * tau).unwrap(), &init).unwrap();
        let free = run_kick_sequence(&eig, &KickSchedule::filling(0.0, tau / 25.0, 6.0 * tau).unwrap(), &init).unwrap();
        diffs.push(max_diff(&kicked.atom(0), &free.atom(0)));
    }
    assert!(diffs[0] > diffs[1] && diffs[1] > diffs[2], "{diffs:?}");
}

/// Kicked spectrum of the wide-band test chain.
fn kicked_spectrum(eta: f64, l: usize, phi: f64) -> (Vec<f64>, Vec<f64>, f64) {
    let tau = tau_f(eta);
    let h = build_symmetric_1d_hamiltonian(l, 1.0, eta).unwrap();
    let eig = eigendecompose_arrowhead(&h).unwrap();
    let init = StateVector::basis_state(h.dim(), 0);
    let sched = KickSchedule::filling(phi, tau / 25.0, 10.0 * tau).unwrap();
    let run = run_kick_sequence(&eig, &sched, &init).unwrap();
    let p = run.final_state.amplitudes()[1..].iter().map(|a| a.norm_sqr()).collect();
    (h.diag().to_vec(), p, sched.period)
}

fn argmax_in(x: &[f64], y: &[f64], lo: f64, hi: f64) -> f64 {
    let mut best = (f64::NAN, -1.0);
    for (&a, &b) in x.iter().zip(y) {
        if a > lo && a < hi && b > best.1 {
            best = (a, b);
        }
    }
    best.0
}

fn window_sum(x: &[f64], y: &[f64], c: f64, w: f64) -> f64 {
    x.iter().zip(y).filter(|(a, _)| (**a - c).abs() <= w).map(|(_, b)| b).sum()
}

#[test]
fn half_turn_kicks_split_the_line() {
    let (x, y, tr) = kicked_spectrum(0.9, 3000, PI);
    let c = PI / tr;
    let right = argmax_in(&x, &y, 0.0, 3000.0);
    let left = argmax_in(&x, &y, -3000.0, 0.0);
    assert!((right - c).abs() <= 0.5, "{right} vs {c}");
    assert!((left + c).abs() <= 0.5, "{left} vs {c}");
    // Satellites at ±3π/τ_r carry sinc²(3π/2)/sinc²(π/2) = 1/9 of the main peaks.
    let gamma = 2.0 * PI * 0.81;
    let w = 10.0 * gamma;
    let pred = predicted_kick_spectrum(PI, tr, 3).unwrap();
    let main = window_sum(&x, &y, c, w);
    for &(offset, weight) in &pred {
        if offset.abs() < 2900.0 - w {
            let ratio = window_sum(&x, &y, offset, w) / main;
            let expected = weight / pred[3].1;
            assert!((ratio / expected - 1.0).abs() < 0.05, "offset {offset}: {ratio} vs {expected}");
        }
    }
}

#[test]
fn small_kicks_shift_the_line() {
    let phi = 15f64.to_radians();
    let (x, y, tr) = kicked_spectrum(0.9, 3000, phi);
    let peak = argmax_in(&x, &y, -3000.0, 3000.0);
    assert!((peak - phi / tr).abs() <= 0.5, "{peak} vs {}", phi / tr);
}

/// Composite Simpson quadrature of `∫_0^1 e^{i(φ + 2πn)s} ds`.
fn quadrature_weight(phi: f64, n: i64) -> f64 {
    let m = 20_000;
    let k = phi + 2.0 * PI * n as f64;
    let h = 1.0 / m as f64;
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..=m {
        let w = if i == 0 || i == m {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        };
        acc += Complex64::from_polar(w, k * i as f64 * h);
    }
    (acc * h / 3.0).norm_sqr()
}

#[test]
fn predicted_weights_match_quadrature() {
    for phi in [PI, 0.3, 2.0] {
        let p = predicted_kick_spectrum(phi, 1.0, 5).unwrap();
        for (i, &(offset, weight)) in p.iter().enumerate() {
            let n = i as i64 - 5;
            assert!((offset - (phi + 2.0 * PI * n as f64)).abs() < 1e-12);
            assert!((weight - quadrature_weight(phi, n)).abs() < 1e-12, "phi={phi} n={n}");
        }
    }
}

#[test]
fn predicted_weights_sum_to_one() {
    for phi in [PI, 0.7, 0.01] {
        let h = 20_000;
        let total: f64 = predicted_kick_spectrum(phi, 0.2, h).unwrap().iter().map(|p| p.1).sum();
        // Omitted tail: Σ_{|n|>h} 4 sin²(φ/2)/(φ + 2πn)² < 2.2/(π² h).
        let tail = 1.0 - total;
        assert!(tail > -1e-12 && tail < 2.2 / (PI * PI * h as f64), "{phi}: {total}");
    }
    let p = predicted_kick_spectrum(1e-9, 1.0, 2).unwrap();
    assert!((p[2].1 - 1.0).abs() < 1e-15 && p[2].0.abs() < 1e-8);
}

fn two_atom(delta: f64, omega_d: f64, initial: InitialState, half_width: usize) -> TwoAtomSpec {
    TwoAtomSpec { delta1: delta, delta2: -delta, omega_d, eta: 2.4, epsilon: 1.0, half_width, initial }
}

#[test]
fn equal_rows_rotate_to_a_single_coupled_combination() {
    let h = build_two_atom_hamiltonian(&two_atom(0.0, 0.0, InitialState::Up, 20)).unwrap();
    for k in 0..h.oscillators() {
        let (a, b) = (h.border(0)[k], h.border(1)[k]);
        assert!(((a + b) * FRAC_1_SQRT_2 - 2f64.sqrt() * 2.4).abs() < 1e-14);
        assert_eq!(a - b, 0.0);
    }
    assert_eq!(h.head(), &[0.0, 0.0, 0.0, 0.0]);
}

#[test]
fn singlet_is_stationary() {
    let spec = two_atom(0.0, 5.0 * 2.0 * PI * 5.76, InitialState::Singlet, 1000);
    let times: Vec<f64> = (0..40).map(|i| i as f64 * 0.3 * spec.tau_f()).collect();
    let run = run_two_atom(&spec, &times, 8.0 * spec.tau_f()).unwrap();
    for (p1, p2) in run.atom1.iter().zip(&run.atom2) {
        assert!((p1 + p2 - 1.0).abs() < 1e-10);
        assert!((p1 - 0.5).abs() < 1e-10);
    }
    assert!(run.spectrum.total() < 1e-10);
}

#[test]
fn symmetric_pair_settles_at_a_quarter() {
    for omega_d in [0.0, 5.0 * 2.0 * PI * 5.76] {
        let spec = two_atom(0.0, omega_d, InitialState::Up, 2000);
        let t = 8.0 * spec.tau_f();
        let run = run_two_atom(&spec, &[t], t).unwrap();
        assert!((run.atom1[0] - 0.25).abs() < 0.02, "{}", run.atom1[0]);
        assert!((run.atom2[0] - 0.25).abs() < 0.02, "{}", run.atom2[0]);
    }
}

#[test]
fn dipolar_coupling_exchanges_population() {
    let gamma = 2.0 * PI * 5.76;
    let spec = two_atom(0.0, 5.0 * gamma, InitialState::Up, 2000);
    let times: Vec<f64> = (0..200).map(|i| i as f64 * 0.01 * spec.tau_f()).collect();
    let run = run_two_atom(&spec, &times, spec.tau_f()).unwrap();
    // Exchange at 2ω_d: the second atom gains population within half a period.
    let half = (PI / (2.0 * 5.0 * gamma) / (0.01 * spec.tau_f())).round() as usize;
    assert!(run.atom2[half] > 0.5, "{}", run.atom2[half]);
    assert!(run.atom1[half] < run.atom2[half]);
}

#[test]
fn singlet_overlap_has_constant_modulus_in_the_symmetric_case() {
    let spec = two_atom(0.0, 3.0, InitialState::Up, 800);
    let h = build_two_atom_hamiltonian(&spec).unwrap();
    let eig = eigendecompose_bordered(&h).unwrap();
    let s = spec.initial.state(h.dim());
    for i in 0..20 {
        let psi = propagate(&s, &eig, 0.01 * i as f64).unwrap();
        let a = psi.amplitudes();
        let overlap = (a[0] - a[1]) * FRAC_1_SQRT_2;
        assert!((overlap.norm() - FRAC_1_SQRT_2).abs() < 1e-10);
    }
}

#[test]
fn spectra_of_both_atomic_bases_sum_alike() {
    let gamma = 2.0 * PI * 5.76;
    let mut spec = two_atom(5.0 * gamma, 5.0 * gamma, InitialState::Up, 1500);
    let eig = eigendecompose_bordered(&build_two_atom_hamiltonian(&spec).unwrap()).unwrap();
    let t = 8.0 * spec.tau_f();
    let mut sums = [vec![0.0; 3000], vec![0.0; 3000]];
    for (i, init) in
        [InitialState::Up, InitialState::Down, InitialState::Singlet, InitialState::Triplet].into_iter().enumerate()
    {
        spec.initial = init;
        let run = run_two_atom_with(&spec, &eig, &[t], t).unwrap();
        for (s, p) in sums[i / 2].iter_mut().zip(&run.spectrum.probabilities) {
            *s += p;
        }
    }
    assert!(max_diff(&sums[0], &sums[1]) < 1e-8);
}

#[test]
fn two_atom_propagation_matches_dense_oracle() {
    let spec = two_atom(4.0, 7.0, InitialState::Triplet, 150);
    let h = build_two_atom_hamiltonian(&spec).unwrap();
    let eig = eigendecompose_bordered(&h).unwrap();
    let dense = dense_eig_oracle(&h).unwrap();
    let s = spec.initial.state(h.dim());
    for t in [0.0, 0.01, 0.05, 0.2] {
        let a = propagate(&s, &eig, t).unwrap();
        let b = propagate(&s, &dense, t).unwrap();
        for (x, y) in a.amplitudes().iter().zip(b.amplitudes()) {
            assert!((x - y).norm() < 1e-10);
        }
    }
}

#[test]
fn kicks_act_on_both_atoms() {
    let s = InitialState::Triplet.state(5);
    let k = apply_phase_kick(&s, PI / 2.0, 2).unwrap();
    assert!((k.amplitudes()[0] - Complex64::new(0.0, -FRAC_1_SQRT_2)).norm() < 1e-15);
    assert!((k.amplitudes()[1] - Complex64::new(0.0, -FRAC_1_SQRT_2)).norm() < 1e-15);
    assert_eq!(k.basis(), Basis::Site);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn kicked_runs_conserve_norm(phi in -7.0f64..7.0, ratio in 2.0f64..40.0) {
        let h = build_symmetric_1d_hamiltonian(150, 1.0, 1.8).unwrap();
        let eig = eigendecompose_arrowhead(&h).unwrap();
        let tau = tau_f(1.8);
        let sched = KickSchedule::filling(phi, tau / ratio, 5.0 * tau).unwrap();
        let run = run_kick_sequence(&eig, &sched, &StateVector::basis_state(h.dim(), 0)).unwrap();
        prop_assert!((run.final_state.norm_sqr() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn site_eigen_round_trip(seed in 0u64..1000) {
        let h = build_symmetric_1d_hamiltonian(60, 1.0, 0.9).unwrap();
        let eig = eigendecompose_arrowhead(&h).unwrap();
        let amps: Vec<Complex64> = (0..h.dim())
            .map(|i| Complex64::new(((i as u64 * 31 + seed) % 17) as f64 - 8.0, ((i as u64 * 7 + seed) % 5) as f64))
            .collect();
        let s = StateVector::new(amps, Basis::Site);
        let back = to_site(&to_eigen(&s, &eig).unwrap(), &eig).unwrap();
        for (a, b) in s.amplitudes().iter().zip(back.amplitudes()) {
            prop_assert!((a - b).norm() < 1e-10 * (1.0 + a.norm()));
        }
    }
}

use std::f64::consts::PI;

use emission_core::arrowhead::build_symmetric_1d_hamiltonian;
use emission_core::exact1d::{eigvec_coefficients, secular_roots, Exact1D, Exact1DConfig, FiniteChain};
use nalgebra::SymmetricEigen;
use num_complex::Complex64;
use proptest::prelude::*;

/// Eigenpairs of the finite chain from a general dense solver.
fn dense_chain(l: usize, eps: f64, eta: f64) -> (Vec<f64>, Vec<f64>) {
    let h = build_symmetric_1d_hamiltonian(l, eps, eta).unwrap().to_dense();
    let e = SymmetricEigen::new(h);
    let atomic = (0..e.eigenvalues.len()).map(|j| e.eigenvectors[(0, j)]).collect();
    (e.eigenvalues.iter().copied().collect(), atomic)
}

#[test]
fn finite_chain_matches_dense_propagation() {
    let (eps, eta, l) = (1.0, 2.4, 100);
    let chain = FiniteChain::new(Exact1DConfig::new(eps, eta, l).unwrap()).unwrap();
    let (values, atomic) = dense_chain(l, eps, eta);
    let tau = eps / (2.0 * PI * eta * eta);
    for i in 0..50 {
        let t = 8.0 * tau * i as f64 / 49.0;
        let reference: Complex64 =
            values.iter().zip(&atomic).map(|(&lam, &u)| Complex64::from_polar(u * u, -lam * t)).sum();
        let got = chain.survival_amplitude(t);
        assert!((got.norm_sqr() - reference.norm_sqr()).abs() < 1e-10, "t={t}");
    }
}

#[test]
fn renormalized_weights_reproduce_the_finite_chain() {
    // Weight of each finite eigenvector on the atom from the truncated secular
    // sums: 1 / (1 + η² Σ 1/(λ - lε)²).
    let (eps, eta, l) = (1.0, 1.3, 100);
    let chain = FiniteChain::new(Exact1DConfig::new(eps, eta, l).unwrap()).unwrap();
    let (values, _) = dense_chain(l, eps, eta);
    let weights: Vec<f64> = values
        .iter()
        .map(|&lam| {
            let s: f64 = (1..=l as i64)
                .flat_map(|m| [m, -m])
                .map(|m| 1.0 / ((lam - m as f64 * eps) * (lam - m as f64 * eps)))
                .sum();
            1.0 / (1.0 + eta * eta * s)
        })
        .collect();
    for i in 0..50 {
        let t = 0.37 * i as f64;
        let reference: Complex64 =
            values.iter().zip(&weights).map(|(&lam, &w)| Complex64::from_polar(w, -lam * t)).sum();
        assert!((chain.survival_amplitude(t) - reference).norm() < 1e-10, "t={t}");
        let k = 7;
        let emitted: Complex64 = values
            .iter()
            .zip(&weights)
            .map(|(&lam, &w)| Complex64::from_polar(w * eta / (lam - k as f64 * eps), -lam * t))
            .sum();
        assert!((chain.emission_amplitude(k, t) - emitted).norm() < 1e-10, "t={t}");
    }
}

#[test]
fn finite_chain_conserves_probability() {
    let chain = FiniteChain::new(Exact1DConfig::new(1.0, 2.0, 150).unwrap()).unwrap();
    for t in [0.0, 0.01, 0.1, 1.0, 10.0] {
        let p: f64 = chain.state(t).iter().map(|a| a.norm_sqr()).sum();
        assert!((p - 1.0).abs() < 1e-10);
        assert!(chain.emission_amplitude(3, 0.0).norm() < 1e-14);
    }
}

#[test]
fn secular_residual_within_truncated_tail() {
    // The roots solve the infinite chain; the truncated sum misses the tail
    // Σ_{|l|>L} 1/(λ - lε) = -2λ/ε² Σ_{l>L} 1/(l² - (λ/ε)²).
    let (eps, eta, l) = (1.0, 2.4, 100usize);
    let cfg = Exact1DConfig::new(eps, eta, l).unwrap();
    let roots = secular_roots(&cfg).unwrap();
    for k in -(l as i64)..=(l as i64) {
        let lam = roots.get(k);
        let sum: f64 = (1..=l as i64).flat_map(|m| [m, -m]).map(|m| 1.0 / (lam - m as f64 * eps)).sum();
        let residual = (eta * eta * sum - lam).abs();
        let x = lam / eps;
        let tail: f64 = ((l + 1)..(l + 2_000_000)).map(|m| 1.0 / ((m * m) as f64 - x * x)).sum::<f64>()
            + 1.0 / (l as f64 + 2_000_000.0);
        let bound = eta * eta * 2.0 * lam.abs() / (eps * eps) * tail;
        assert!(residual <= bound * (1.0 + 1e-6) + 1e-11, "k={k} residual={residual} bound={bound}");
    }
}

#[test]
fn central_roots_agree_with_the_large_finite_chain() {
    // Central eigenvalues of a wide finite chain approach the tangent roots.
    let (eps, eta, l) = (1.0, 2.4, 1500);
    let cfg = Exact1DConfig::new(eps, eta, l).unwrap();
    let roots = secular_roots(&cfg).unwrap();
    let chain = FiniteChain::new(cfg).unwrap();
    let values = chain.decomposition().eigenvalues();
    for k in -50i64..=50 {
        let j = (k + l as i64) as usize;
        assert!((values[j] - roots.get(k)).abs() < 2e-3, "k={k}");
    }
}

#[test]
fn atomic_weight_uses_the_eigenvalue_over_coupling() {
    // The atomic weight of a central eigenvector of a wide finite chain
    // matches 1/(3 + (πη/ε)² + (λ/η)²); the variant with (πλ/η)² does not.
    let (eps, eta, l) = (1.0, 2.4, 1500);
    let cfg = Exact1DConfig::new(eps, eta, l).unwrap();
    let chain = FiniteChain::new(cfg).unwrap();
    let row = chain.decomposition().atomic_row(0);
    for k in [1i64, 3, 6, 10] {
        let a = eigvec_coefficients(&cfg, k).unwrap();
        let lam = a.eigenvalue();
        let j = (k + l as i64) as usize;
        let finite = row[j] * row[j];
        let closed = a.coefficient(0).powi(2);
        let window = 2.0 * eta * eta / (eps * eps * l as f64);
        assert!((finite - closed).abs() < window * closed, "k={k} finite={finite} closed={closed}");
        if k >= 10 {
            let misprint = 1.0 / (3.0 + (PI * eta / eps).powi(2) + (PI * lam / eta).powi(2));
            assert!((finite - misprint).abs() > 0.5 * finite, "k={k}");
        }
    }
}

#[test]
fn zero_root_coefficients_normalize_in_the_limit() {
    let mut last = f64::INFINITY;
    for l in [10i64, 100, 1000, 10000] {
        let cfg = Exact1DConfig::new(1.0, 2.0, l as usize).unwrap();
        let a = eigvec_coefficients(&cfg, 0).unwrap();
        let norm: f64 = (-l..=l).map(|m| a.coefficient(m).powi(2)).sum();
        let deficit = 1.0 - norm;
        // Tail of 2 η² α₀⁰² Σ_{m>L} 1/m².
        let predicted = 2.0 * 4.0 * a.coefficient(0).powi(2) / (l as f64 + 0.5);
        assert!(deficit > 0.0 && deficit < last);
        assert!((deficit - predicted).abs() < 1e-3 * predicted, "L={l}");
        last = deficit;
    }
}

#[test]
fn truncation_deficit_follows_the_tail_estimate() {
    // Weights fall off as η²/λ², so 1 - |a₀(0)|² ≈ 4η²/(ε² L).
    for ratio in [3.0, 5.0] {
        let l = 200_000;
        let e = Exact1D::new(Exact1DConfig::new(1.0, ratio, l).unwrap()).unwrap();
        let deficit = 1.0 - e.survival_probability(0.0);
        let predicted = 4.0 * ratio * ratio / l as f64;
        assert!((deficit - predicted).abs() < 0.01 * predicted, "ratio={ratio} {deficit} {predicted}");
    }
}

#[test]
fn closed_form_tracks_the_finite_chain_for_wide_windows() {
    let cfg = Exact1DConfig::new(1.0, 2.4, 3000).unwrap();
    let closed = Exact1D::new(cfg).unwrap();
    let finite = FiniteChain::new(cfg).unwrap();
    // Dividing by the truncated norm removes the window deficit; what remains
    // is a finite-window effect on the same 2η²/(ε²L) scale.
    let norm = closed.truncated_norm();
    let scale = 2.0 * 2.4 * 2.4 / 3000.0;
    for i in 0..20 {
        let t = 0.3 * cfg.tau_f() * i as f64;
        let d = (closed.survival_amplitude(t) / norm - finite.survival_amplitude(t)).norm();
        let e = (closed.emission_amplitude(4, t).unwrap() / norm - finite.emission_amplitude(4, t)).norm();
        assert!(d < scale, "t={t} d={d}");
        assert!(e < scale, "t={t} e={e}");
    }
}

#[test]
fn deviation_shrinks_with_coupling() {
    let mut peaks = Vec::new();
    for ratio in [7.0, 8.0, 10.0] {
        let cfg = Exact1DConfig::new(1.0, ratio, 500_000).unwrap();
        let e = Exact1D::new(cfg).unwrap();
        let tau = cfg.tau_f();
        let times: Vec<f64> = (0..40).map(|i| tau * (0.5 + 0.05 * i as f64)).collect();
        let dev = e.golden_rule_deviation(&times).unwrap();
        peaks.push(dev.iter().fold(0.0f64, |m, d| m.max(d.abs())));
    }
    assert!(peaks[0] > peaks[1] && peaks[1] > peaks[2], "{peaks:?}");
}

#[test]
fn emission_is_nearly_empty_at_time_zero() {
    let e = Exact1D::new(Exact1DConfig::new(1.0, 2.4, 20_000).unwrap()).unwrap();
    for k in [1, -1, 5, 100, -300] {
        assert!(e.emission_amplitude(k, 0.0).unwrap().norm() < 1e-3);
    }
}

#[test]
fn survival_is_one_without_truncation_in_the_limit() {
    let mut last = 1.0;
    for l in [1_000usize, 10_000, 100_000] {
        let e = Exact1D::new(Exact1DConfig::new(1.0, 1.0, l).unwrap()).unwrap();
        let d = 1.0 - e.truncated_norm();
        assert!(d > 0.0 && d < last);
        last = d;
    }
    assert!(last < 1e-4);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn roots_are_antisymmetric_and_bracketed(ratio in 0.05f64..12.0, l in 1usize..400) {
        let cfg = Exact1DConfig::new(1.0, ratio, l).unwrap();
        let r = secular_roots(&cfg).unwrap();
        prop_assert_eq!(r.get(0), 0.0);
        for k in 1..=l as i64 {
            prop_assert_eq!(r.get(-k), -r.get(k));
            prop_assert!(r.get(k) > k as f64 && r.get(k) < k as f64 + 0.5);
        }
    }

    #[test]
    fn survival_is_real_and_bounded(ratio in 0.1f64..10.0, t in 0.0f64..5.0) {
        let e = Exact1D::new(Exact1DConfig::new(1.0, ratio, 500).unwrap()).unwrap();
        let a = e.survival_amplitude(t);
        prop_assert_eq!(a.im, 0.0);
        prop_assert!(a.norm() <= e.truncated_norm() + 1e-12);
    }
}

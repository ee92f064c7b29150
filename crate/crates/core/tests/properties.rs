#![allow(clippy::needless_range_loop)]

use masersim::circuit::{
    analytic_photon_number, coupler_frequency, coupling_for_ratio, effective_model, masing_ratio, CircuitDesign, CouplingConvention,
    EffectiveModel,
};
use masersim::hilbert::{ladder, number, CompositeSpace, DensityMatrix};
use masersim::lindblad::{unvectorize, vectorize, SolverMethod, SolverOptions};
use masersim::maser::{effective_liouvillian, jaynes_cummings_state, solve_effective};
use masersim::observables::photon_stats;
use masersim::sweep::hausdorff;
use masersim::units::mhz;
use num_complex::Complex64 as C64;
use proptest::prelude::*;

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig { cases, failure_persistence: None, ..ProptestConfig::default() }
}

fn g_eff(flux: f64) -> f64 {
    effective_model(&CircuitDesign::reference(), flux, CouplingConvention::Full).unwrap().g_eff[0]
}

/// Hermitian matrix from a flat list of entries in [−1, 1].
fn hermitian(d: usize, raw: &[f64]) -> Vec<Vec<C64>> {
    let mut m = vec![vec![C64::new(0.0, 0.0); d]; d];
    let mut k = 0;
    for i in 0..d {
        m[i][i] = C64::new(raw[k], 0.0);
        k += 1;
        for j in (i + 1)..d {
            m[i][j] = C64::new(raw[k], raw[k + 1]);
            m[j][i] = m[i][j].conj();
            k += 2;
        }
    }
    m
}

/// Random density matrix A A† / Tr(A A†).
fn density(d: usize, raw: &[f64]) -> Vec<Vec<C64>> {
    let a: Vec<Vec<C64>> = (0..d).map(|i| (0..d).map(|j| C64::new(raw[2 * (i * d + j)], raw[2 * (i * d + j) + 1])).collect()).collect();
    let mut rho = vec![vec![C64::new(0.0, 0.0); d]; d];
    for i in 0..d {
        for j in 0..d {
            rho[i][j] = (0..d).map(|k| a[i][k] * a[j][k].conj()).sum();
        }
    }
    let tr: f64 = (0..d).map(|i| rho[i][i].re).sum();
    rho.iter().map(|r| r.iter().map(|x| x / tr).collect()).collect()
}

fn model(gamma: f64, kappa: f64, g: f64, detuning: f64) -> EffectiveModel {
    EffectiveModel::jaynes_cummings(mhz(gamma), mhz(kappa), mhz(g), mhz(detuning))
}

#[test]
fn flux_slope_vanishes_at_symmetry_points() {
    let h = 1e-4;
    let slope = |f: f64| (g_eff(f + h) - g_eff(f - h)) / (2.0 * h);
    let peak = (1..100).map(|k| slope(0.5 * k as f64 / 100.0).abs()).fold(0.0, f64::max);
    assert!(peak > 0.0);
    for f in [0.0, 0.5] {
        assert!(slope(f).abs() < 1e-6 * peak, "slope at {f}: {} vs peak {peak}", slope(f));
    }
}

#[test]
fn analytic_photon_number_is_continuous_at_threshold() {
    let (gamma, kappa) = (mhz(50.0), mhz(0.5));
    let g1 = coupling_for_ratio(gamma, kappa, 1.0);
    assert_eq!(analytic_photon_number(gamma, kappa, g1), 0.0);
    for eps in [1e-3, 1e-6, 1e-9] {
        let below = analytic_photon_number(gamma, kappa, g1 * (1.0 + eps));
        assert!(below > 0.0 && below < 50.0 * 2.0 * eps * 1.01);
    }
}

proptest! {
    #![proptest_config(config(64))]

    #[test]
    fn coupling_is_even_and_periodic_in_flux(flux in -2.0f64..2.0) {
        let g = g_eff(flux);
        prop_assert!((g - g_eff(-flux)).abs() <= 1e-12 * g.abs());
        prop_assert!((g - g_eff(flux + 1.0)).abs() <= 1e-9 * g.abs());
    }

    #[test]
    fn coupler_stays_below_source_and_reservoir(flux in -1.0f64..1.0) {
        let d = CircuitDesign::reference();
        let wc = coupler_frequency(&d, flux);
        prop_assert!(wc < d.source_frequency.min(d.reservoirs[0].frequency));
    }

    #[test]
    fn masing_ratio_round_trip(gamma in 1e-3f64..1e3, kappa in 1e-3f64..1e3, g in 1e-3f64..1e3) {
        let lambda = masing_ratio(gamma, kappa, g).unwrap();
        prop_assert!((lambda * 4.0 * g * g / (gamma * kappa) - 1.0).abs() < 1e-12);
        let back = coupling_for_ratio(gamma, kappa, lambda);
        prop_assert!((back - g).abs() < 1e-12 * g);
    }

    #[test]
    fn analytic_photon_number_vanishes_above_threshold(gamma in 1e-2f64..1e3, kappa in 1e-2f64..1e3, lambda in 1.0f64..100.0) {
        let g = coupling_for_ratio(gamma, kappa, lambda) * (1.0 - 1e-12);
        prop_assert_eq!(analytic_photon_number(gamma, kappa, g), 0.0);
    }
}

proptest! {
    #![proptest_config(config(32))]

    #[test]
    fn liouvillian_preserves_trace_and_hermiticity(
        gamma in 0.1f64..80.0, kappa in 0.05f64..5.0, g in 0.0f64..20.0, det in -10.0f64..10.0,
        n in 2usize..6,
        raw in proptest::collection::vec(-1.0f64..1.0, 144),
    ) {
        let m = model(gamma, kappa, g, det);
        let l = effective_liouvillian(&m, &[n], usize::MAX).unwrap();
        let d = 2 * n;
        let rho = DensityMatrix::from_dense(l.space().clone(), &hermitian(d, &raw)).unwrap();
        let norm = rho.entries().iter().map(|(_, _, x)| x.norm()).fold(0.0, f64::max);
        let out = unvectorize(l.space(), &l.apply(&vectorize(&rho)));
        prop_assert!(out.trace().norm() < 1e-10 * norm);
        prop_assert!(out.hermiticity_defect() < 1e-10 * norm.max(1.0) * l.matrix().max_abs().max(1.0));
    }

    #[test]
    fn steady_state_is_a_density_matrix(
        gamma in 0.5f64..60.0, kappa in 0.1f64..5.0, g in 0.1f64..20.0, det in -5.0f64..5.0, n in 2usize..40,
    ) {
        let s = solve_effective(&model(gamma, kappa, g, det), &[n], &SolverOptions::default()).unwrap();
        prop_assert!(s.solution.min_eigenvalue >= -1e-7);
        prop_assert!(s.solution.rho.min_eigenvalue().unwrap() >= -1e-7);
        prop_assert!((s.solution.rho.diagonal().iter().sum::<f64>() - 1.0).abs() < 1e-9);
        prop_assert!(s.solution.hermiticity_defect < 1e-9);
        let fock_sum: f64 = s.reservoirs[0].fock.iter().sum();
        prop_assert!((fock_sum - 1.0).abs() < 1e-9);
    }

    #[test]
    fn direct_and_iterative_solvers_agree(
        gamma in 0.5f64..60.0, kappa in 0.1f64..5.0, g in 0.1f64..20.0, n in 2usize..=100,
    ) {
        let direct = jaynes_cummings_state(mhz(gamma), mhz(kappa), mhz(g), n, &SolverOptions::default()).unwrap();
        let iterative = jaynes_cummings_state(mhz(gamma), mhz(kappa), mhz(g), n, &SolverOptions::with_method(SolverMethod::IterativeKrylov)).unwrap();
        prop_assert!(direct.solution.rho.max_abs_diff(&iterative.solution.rho) < 1e-8);
    }

    #[test]
    fn fock_distribution_matches_operator_moments(n in 2usize..12, raw in proptest::collection::vec(-1.0f64..1.0, 288)) {
        let space = CompositeSpace::single(n).unwrap();
        let rho = DensityMatrix::from_dense(space.clone(), &density(n, &raw)).unwrap();
        let stats = photon_stats(&rho).unwrap();
        let num = number(n).unwrap();
        let a = ladder(n).unwrap();
        let mean = rho.expectation(&num).unwrap().re;
        let second = rho.expectation(&num.mul(&num).unwrap()).unwrap().re;
        let adag = a.dagger();
        let falling = rho.expectation(&adag.mul(&adag).unwrap().mul(&a).unwrap().mul(&a).unwrap()).unwrap().re;
        prop_assert!((stats.mean - mean).abs() < 1e-9);
        prop_assert!((stats.variance - (second - mean * mean)).abs() < 1e-9);
        if let Some(g2) = stats.g2 {
            prop_assert!((g2 - falling / (mean * mean)).abs() < 1e-9 * (1.0 + g2));
        }
    }

    #[test]
    fn hausdorff_is_symmetric_with_zero_self_distance(
        a in proptest::collection::vec((-10.0f64..10.0, -10.0f64..10.0), 1..40),
        b in proptest::collection::vec((-10.0f64..10.0, -10.0f64..10.0), 1..40),
    ) {
        let a: Vec<[f64; 2]> = a.into_iter().map(|(x, y)| [x, y]).collect();
        let b: Vec<[f64; 2]> = b.into_iter().map(|(x, y)| [x, y]).collect();
        prop_assert_eq!(hausdorff(&a, &b), hausdorff(&b, &a));
        prop_assert_eq!(hausdorff(&a, &a), 0.0);
        prop_assert!(hausdorff(&a, &b) >= 0.0);
    }
}

// Copyright 2026 The rabi-qpt Authors
// SPDX-License-Identifier: Apache-2.0

use ndarray::Array2;
use num_complex::Complex64 as C64;
use proptest::prelude::*;

use rabi_core::analytics::{c2k_closed, critical_quantities};
use rabi_core::dressed::{DissipationParams, DressedSubspace};
use rabi_core::hermite::{hermite, hermite_log};
use rabi_core::master::{master_evolve, MasterOptions};
use rabi_core::operator::{squeeze_op, HilbertConfig, Operator};
use rabi_core::rabi::{nbar0, ModelParams, Parity, RabiSpectrum};
use rabi_core::{herm_eig, DriveSpec};

fn matrix(n: usize) -> impl Strategy<Value = Array2<C64>> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), n * n)
        .prop_map(move |v| Array2::from_shape_fn((n, n), |(i, j)| C64::new(v[i * n + j].0, v[i * n + j].1)))
}

fn hermitian(n: usize) -> impl Strategy<Value = Operator> {
    matrix(n).prop_map(|a| {
        let h = &a + &a.t().mapv(|z| z.conj());
        Operator::from_matrix(h).unwrap()
    })
}

fn ln_factorial(n: usize) -> f64 {
    (1..=n).map(|k| (k as f64).ln()).sum()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn commutator_is_antisymmetric_and_traceless(a in matrix(6), b in matrix(6)) {
        let a = Operator::from_matrix(a).unwrap();
        let b = Operator::from_matrix(b).unwrap();
        let ab = a.commutator(&b);
        let ba = b.commutator(&a);
        let sum = ab.matrix() + ba.matrix();
        prop_assert!(sum.iter().all(|z| z.norm() < 1e-12));
        let tr: C64 = (0..6).map(|i| ab.get(i, i)).sum();
        prop_assert!(tr.norm() < 1e-12);
    }

    #[test]
    fn eigensystem_contract(h in hermitian(9)) {
        let eig = herm_eig(&h).unwrap();
        prop_assert!(eig.max_residual(&h) <= 1e-9 * h.norm().max(1.0));
        prop_assert!(eig.values.windows(2).into_iter().all(|w| w[0] <= w[1]));
        for j in 0..eig.len() {
            let v = eig.vector(j);
            let big = v.iter().copied().fold(C64::new(0.0, 0.0), |m, z| if z.norm() > m.norm() + 1e-14 { z } else { m });
            prop_assert!(big.re > 0.0 && big.im.abs() <= 1e-12 * big.norm());
        }
    }

    #[test]
    fn squeezed_vacuum_amplitudes(r in 0.0f64..0.8, k in 0usize..4) {
        let cfg = HilbertConfig::two_level(120).unwrap();
        let s = squeeze_op(r, &cfg).unwrap();
        let numeric = s.get(2 * k, 0).norm();
        let closed = (k as f64 * r.tanh().ln() + 0.5 * ln_factorial(2 * k)
            - k as f64 * 2f64.ln() - ln_factorial(k) - 0.5 * r.cosh().ln()).exp();
        let closed = if k == 0 { 1.0 / r.cosh().sqrt() } else { closed };
        prop_assert!((numeric - closed).abs() <= 1e-9 * closed.max(1e-300) + 1e-13);
    }

    #[test]
    fn hermite_derivative_identity(n in 1usize..40, x in -6.0f64..6.0) {
        let h = 1e-5;
        let fd = (hermite(n, x + h).unwrap() - hermite(n, x - h).unwrap()) / (2.0 * h);
        let exact = 2.0 * n as f64 * hermite(n - 1, x).unwrap();
        let scale = exact.abs().max(hermite(n, x).unwrap().abs()).max(1.0);
        prop_assert!((fd - exact).abs() <= 1e-5 * scale, "fd {fd} exact {exact}");
    }

    #[test]
    fn hermite_log_matches_direct(n in 0usize..60, x in -8.0f64..8.0) {
        let d = hermite(n, x).unwrap();
        let l = hermite_log(n, x).unwrap().value();
        prop_assert!((d - l).abs() <= 1e-10 * d.abs().max(1e-300));
    }

    #[test]
    fn gap_law_in_the_normal_phase(gc in 0.05f64..0.9) {
        let s = RabiSpectrum::compute(&ModelParams::from_gc(gc, 1e6).unwrap(), 128, 2).unwrap();
        prop_assert!((s.gap(1).unwrap() - (1.0 - gc * gc).sqrt()).abs() <= 1e-2);
    }

    #[test]
    fn ground_state_is_even(gc in 0.0f64..1.4, ratio in 10.0f64..1e4) {
        let p = ModelParams::from_gc(gc, ratio).unwrap();
        let n = rabi_core::rabi::default_n_fock(&p);
        let s = RabiSpectrum::compute(&p, n, 2).unwrap();
        prop_assert_eq!(s.ground().parity, Parity::Even);
    }

    #[test]
    fn superradiant_doublet_is_degenerate(gc in 1.2f64..1.6) {
        let p = ModelParams::from_gc(gc, 1e4).unwrap();
        let n = rabi_core::rabi::default_n_fock(&p);
        let s = RabiSpectrum::compute(&p, n, 2).unwrap();
        prop_assert!(s.gap(1).unwrap().abs() < 1e-6);
        prop_assert_eq!(s.state(1).unwrap().parity, Parity::Odd);
        prop_assert!(s.gap(2).unwrap() > 0.1);
    }

    #[test]
    fn nbar0_grows_towards_the_critical_point(a in 0.0f64..0.9, b in 0.0f64..0.9, ratio in 1e2f64..1e4) {
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        prop_assume!(hi - lo > 1e-3);
        let n_lo = nbar0(&ModelParams::from_gc(lo, ratio).unwrap(), 128).unwrap();
        let n_hi = nbar0(&ModelParams::from_gc(hi, ratio).unwrap(), 128).unwrap();
        prop_assert!(n_lo <= n_hi);
    }

    #[test]
    fn normal_phase_amplitudes_match_closed_form(gc in 0.1f64..0.9, k in 0usize..5) {
        let p = ModelParams::from_gc(gc, 1e6).unwrap();
        let numeric = rabi_core::rabi::ck_numeric(&p, 160, 2 * k).unwrap().norm();
        let closed = c2k_closed(k, &critical_quantities(gc, 1e6).unwrap()).unwrap();
        prop_assert!((numeric - closed).abs() <= 1e-2 * closed + 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn xplus_is_strictly_upper_triangular(gc in 0.2f64..1.3, ratio in 10.0f64..1e3) {
        let p = ModelParams::from_gc(gc, ratio).unwrap().with_omega_mu(-4.6).unwrap();
        let n = rabi_core::rabi::default_n_fock(&p).max(160);
        let sub = DressedSubspace::from_model(&p, n, 12).unwrap();
        let x = sub.xplus();
        for j in 0..sub.m() {
            for i in 0..=j {
                prop_assert_eq!(x[[j, i]], C64::new(0.0, 0.0));
            }
        }
    }

    #[test]
    fn master_equation_preserves_trace(kappa in 0.0f64..0.1, g1 in 0.0f64..0.1, g2 in 0.0f64..0.1, start in 0usize..10) {
        let p = ModelParams::from_gc(0.8, 100.0).unwrap().with_omega_mu(-4.6).unwrap();
        let sub = DressedSubspace::from_model(&p, 128, 10).unwrap();
        let d = DriveSpec::new(0.03, 0.06, 4.25, 0.25, 2, 4, 1.0).unwrap();
        let mut rho = Array2::<C64>::zeros((sub.m(), sub.m()));
        rho[[start, start]] = C64::new(1.0, 0.0);
        let grid: Vec<f64> = (0..=6).map(|k| 7.0 * k as f64).collect();
        let diss = DissipationParams::new(kappa, g1, g2).unwrap();
        let rec = master_evolve(&sub, Some(&d), &rho, &grid, &diss, &MasterOptions::default()).unwrap();
        prop_assert!(rec.norm.iter().all(|t| (t - 1.0).abs() < 1e-6));
    }
}

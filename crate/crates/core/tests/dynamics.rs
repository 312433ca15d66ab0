// Copyright 2026 The rabi-qpt Authors
// SPDX-License-Identifier: Apache-2.0

use ndarray::Array1;
use num_complex::Complex64 as C64;

use rabi_core::analytics::{p2l_analytic, transfer_time};
use rabi_core::coherent::{schrodinger_evolve, stroboscopic_grid, drive_period, CoherentOptions};
use rabi_core::dressed::{DissipationParams, StateTag};
use rabi_core::master::{phi_out, pure_density, steady_state, Seed, SteadyStateOptions};
use rabi_core::scenario::{Scenario, ScenarioSpec};

fn scenario(gc: f64, ratio: f64, pump: f64, m: usize) -> Scenario {
    Scenario::build(ScenarioSpec { gc, ratio, l: 2, n_d: None, pump_fraction: pump, stokes_ratio: 2.0, n_fock: None, m })
        .unwrap()
}

#[test]
fn weak_drive_transfer_follows_the_effective_model() {
    let sc = scenario(0.9, 100.0, 0.01, 24);
    let t_star = transfer_time(&sc.triple, None).unwrap();
    let expected = p2l_analytic(&sc.triple, t_star).unwrap().norm_sqr();
    let period = drive_period(&sc.drive).unwrap();
    let grid = stroboscopic_grid(period, 1.5 * t_star, &[], 8);
    let mut psi = Array1::<C64>::zeros(sc.subspace.m());
    psi[sc.mu0()] = C64::new(1.0, 0.0);
    let tag = StateTag::Mu(4);
    let opts = CoherentOptions { tracked: vec![tag], ..Default::default() };
    let rec = schrodinger_evolve(&sc.subspace, Some(&sc.drive), &psi, &grid, &opts).unwrap();
    let pop = rec.population(tag).unwrap();
    let first_max = pop
        .windows(3)
        .find(|w| w[1] >= w[0] && w[1] > w[2] && w[1] > 0.5 * expected)
        .map(|w| w[1])
        .expect("population has a maximum");
    assert!((first_max - expected).abs() <= 0.05 * expected, "full {first_max}, effective {expected}");
}

#[test]
fn emission_rate_of_the_target_state() {
    let sc = scenario(0.9, 100.0, 0.05, 20);
    let rho = pure_density(&sc.subspace, StateTag::Mu(4)).unwrap();
    assert!((phi_out(&rho, sc.subspace.xplus(), 0.01) - 0.04).abs() <= 1e-12);
}

#[test]
fn steady_state_forgets_the_initial_state() {
    let sc = scenario(0.95, 100.0, 0.05, 24);
    let diss = DissipationParams::new(0.01, 0.01, 0.01).unwrap();
    let a = steady_state(&sc.subspace, Some(&sc.drive), &diss, &SteadyStateOptions::default()).unwrap();
    let mut mixed = pure_density(&sc.subspace, StateTag::Mu(4)).unwrap() * C64::new(0.3, 0.0);
    mixed = mixed + pure_density(&sc.subspace, StateTag::Mu(1)).unwrap() * C64::new(0.7, 0.0);
    let b = steady_state(&sc.subspace, Some(&sc.drive), &diss, &SteadyStateOptions { seed: Seed::Given(mixed), ..Default::default() })
        .unwrap();
    assert!(a.phi_out > 1e-4);
    assert!((a.phi_out - b.phi_out).abs() <= 5e-3 * a.phi_out, "{} vs {}", a.phi_out, b.phi_out);
    assert!(a.min_eigenvalue > -1e-8);
}

// Copyright 2026 The rabi-qpt Authors
// SPDX-License-Identifier: Apache-2.0

//! Fast invariant checks behind `rabi-qpt validate`.

use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;

use rabi_core::coherent::{schrodinger_evolve, CoherentOptions};
use rabi_core::dressed::{DissipationParams, DressedSubspace, StateTag};
use rabi_core::master::{master_evolve, pure_density, MasterOptions};
use rabi_core::ode::OdeOptions;
use rabi_core::rabi::{ModelParams, Parity, RabiSpectrum};
use rabi_core::DriveSpec;

/// Outcome of one check.
#[derive(Clone, Debug)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, f: impl FnOnce() -> rabi_core::Result<(bool, String)>) -> Check {
    match f() {
        Ok((passed, detail)) => Check { name, passed, detail },
        Err(e) => Check { name, passed: false, detail: format!("error: {e}") },
    }
}

fn small_subspace() -> rabi_core::Result<DressedSubspace> {
    let p = ModelParams::from_gc(0.9, 100.0)?.with_omega_mu(-4.6)?;
    DressedSubspace::from_model(&p, 160, 16)
}

/// Runs the suite. Each check takes well under a second in release builds.
pub fn run_checks() -> Vec<Check> {
    vec![
        check("gap law at Ω/ω = 1e6", || {
            let mut worst: f64 = 0.0;
            for gc in [0.3, 0.6, 0.9] {
                let s = RabiSpectrum::compute(&ModelParams::from_gc(gc, 1e6)?, 128, 2)?;
                worst = worst.max((s.gap(1)? - (1.0 - gc * gc).sqrt()).abs());
            }
            Ok((worst <= 1e-2, format!("max deviation {worst:.3e}")))
        }),
        check("ground state has even parity", || {
            let s = RabiSpectrum::compute(&ModelParams::from_gc(0.7, 1e3)?, 160, 2)?;
            Ok((s.ground().parity == Parity::Even, format!("{:?}", s.ground().parity)))
        }),
        check("X+ is strictly upper triangular", || {
            let sub = small_subspace()?;
            let x = sub.xplus();
            let bad = (0..sub.m()).flat_map(|j| (0..=j).map(move |i| (j, i))).filter(|&(j, i)| x[[j, i]] != C64::new(0.0, 0.0)).count();
            Ok((bad == 0, format!("{bad} entries on or below the diagonal")))
        }),
        check("X-X+ acts as a†a on |μ_4⟩", || {
            let sub = small_subspace()?;
            let i = sub.index_of(StateTag::Mu(4))?;
            let y = sub.emission_number();
            let mut e = Array1::<C64>::zeros(sub.m());
            e[i] = C64::new(1.0, 0.0);
            let v = y.dot(&e);
            let err = v.iter().enumerate().map(|(k, z)| (z - if k == i { C64::new(4.0, 0.0) } else { C64::new(0.0, 0.0) }).norm()).fold(0.0, f64::max);
            Ok((err <= 1e-10, format!("max deviation {err:.3e}")))
        }),
        check("Lindblad jumps lower the energy", || {
            let sub = small_subspace()?;
            let rates = sub.lindblad_rates(&DissipationParams::new(0.01, 0.01, 0.01)?);
            let e = sub.energies();
            let bad = rates.iter().filter(|r| r.rate < 0.0 || e[r.to] > e[r.from]).count();
            Ok((bad == 0 && !rates.is_empty(), format!("{} rates, {bad} violations", rates.len())))
        }),
        check("trace preservation", || {
            let sub = small_subspace()?;
            let d = DriveSpec::new(0.02, 0.04, 4.25, 0.25, 2, 4, 1.0)?;
            let mut rho = Array2::<C64>::zeros((sub.m(), sub.m()));
            rho[[5, 5]] = C64::new(1.0, 0.0);
            let grid: Vec<f64> = (0..=10).map(|k| 5.0 * k as f64).collect();
            let rec = master_evolve(&sub, Some(&d), &rho, &grid, &DissipationParams::new(0.05, 0.02, 0.03)?, &MasterOptions::default())?;
            let err = rec.norm.iter().map(|t| (t - 1.0).abs()).fold(0.0, f64::max);
            Ok((err < 1e-6, format!("max |Tr ρ − 1| = {err:.3e}")))
        }),
        check("undamped master equation matches Schrödinger", || {
            let sub = small_subspace()?;
            let d = DriveSpec::new(0.05, 0.1, 4.25, 0.25, 2, 4, 1.0)?;
            let i = sub.index_of(StateTag::Mu(0))?;
            let mut psi = Array1::zeros(sub.m());
            psi[i] = C64::new(1.0, 0.0);
            let grid: Vec<f64> = (0..=8).map(|k| 4.0 * k as f64).collect();
            let tight = OdeOptions { rtol: 1e-10, atol: 1e-12, ..OdeOptions::coherent() };
            let tracked = vec![StateTag::Mu(0), StateTag::Mu(4)];
            let a = schrodinger_evolve(&sub, Some(&d), &psi, &grid, &CoherentOptions { ode: tight, floquet: false, tracked: tracked.clone() })?;
            let rho = pure_density(&sub, StateTag::Mu(0))?;
            let b = master_evolve(&sub, Some(&d), &rho, &grid, &DissipationParams::none(), &MasterOptions { ode: tight, tracked })?;
            let err = a
                .populations
                .iter()
                .zip(&b.populations)
                .flat_map(|(x, y)| x.1.iter().zip(&y.1).map(|(p, q)| (p - q).abs()))
                .fold(0.0, f64::max);
            Ok((err < 1e-6, format!("max population difference {err:.3e}")))
        }),
    ]
}

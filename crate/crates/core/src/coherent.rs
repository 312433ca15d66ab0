// Copyright 2026 The rabi-qpt Authors
// SPDX-License-Identifier: Apache-2.0

//! Driven Schrödinger evolution in the dressed basis.
//!
//! States are integrated in the interaction picture of the diagonal `H_0`,
//! re-anchored at the start of every drive period so phases stay small.
//! When the two drive frequencies are commensurate the one-period propagator
//! is computed once and stroboscopic states follow by matrix products.

use std::f64::consts::PI;

use ndarray::{Array1, Array2, ArrayView2};
use num_complex::Complex64 as C64;

use crate::dressed::{DressedSubspace, StateTag};
use crate::error::{Error, Result};
use crate::ode::{Dopri5, OdeOptions, OdeStats};
use crate::rabi::DriveSpec;

/// Largest denominator tried when looking for a common drive period.
const MAX_PERIOD_MULTIPLE: u32 = 1000;

/// Common period of the two drive tones, if it exists with a small
/// denominator. Tones with zero amplitude are ignored.
pub fn drive_period(drive: &DriveSpec) -> Option<f64> {
    let mut freqs: Vec<f64> = Vec::new();
    if drive.amp_p != 0.0 && drive.freq_p != 0.0 {
        freqs.push(drive.freq_p);
    }
    if drive.amp_s != 0.0 && drive.freq_s != 0.0 {
        freqs.push(drive.freq_s);
    }
    match freqs.as_slice() {
        [] => None,
        [w] => Some(2.0 * PI / w),
        [a, b] => {
            let (hi, lo) = if a >= b { (*a, *b) } else { (*b, *a) };
            (1..=MAX_PERIOD_MULTIPLE).find_map(|q| {
                let p = hi * f64::from(q) / lo;
                let nearest = p.round();
                ((p - nearest).abs() < 1e-9 * p.max(1.0)).then(|| 2.0 * PI * f64::from(q) / lo)
            })
        }
        _ => unreachable!(),
    }
}

/// Interaction-picture generator `−i f(t) Φ V Φ*` with `Φ = e^{i E (t − t_ref)}`.
#[derive(Clone, Debug)]
pub(crate) struct Frame {
    pub e_rel: Vec<f64>,
    pub v: Array2<C64>,
    pub drive: Option<DriveSpec>,
}

impl Frame {
    pub fn new(sub: &DressedSubspace, drive: Option<&DriveSpec>) -> Self {
        let e_ref = sub.energies()[0];
        Self {
            e_rel: sub.energies().iter().map(|e| e - e_ref).collect(),
            v: sub.drive_coupling().clone(),
            drive: drive.copied(),
        }
    }

    pub fn m(&self) -> usize {
        self.e_rel.len()
    }

    pub fn coefficient(&self, t: f64) -> f64 {
        self.drive.map_or(0.0, |d| d.coefficient(t))
    }

    /// `e^{i E τ}`.
    pub fn phases(&self, tau: f64) -> Vec<C64> {
        self.e_rel.iter().map(|e| C64::from_polar(1.0, e * tau)).collect()
    }

    /// `Φ V Φ*` at local time `tau`.
    pub fn rotated(&self, tau: f64) -> Array2<C64> {
        let ph = self.phases(tau);
        let m = self.m();
        let mut out = self.v.clone();
        for a in 0..m {
            for c in 0..m {
                out[[a, c]] *= ph[a] * ph[c].conj();
            }
        }
        out
    }

    /// Derivative of a block of row state vectors (`k × M`).
    pub fn rhs_rows(&self, t: f64, t_ref: f64, y: &[C64], dy: &mut [C64]) {
        let f = self.coefficient(t);
        let m = self.m();
        let k = y.len() / m;
        if f == 0.0 {
            dy.iter_mut().for_each(|z| *z = C64::new(0.0, 0.0));
            return;
        }
        let vr = self.rotated(t - t_ref);
        let yv = ArrayView2::from_shape((k, m), y).expect("row block");
        // Rows are states: (V ψ)ᵀ = ψᵀ Vᵀ.
        let prod = yv.dot(&vr.t());
        let scale = C64::new(0.0, -f);
        for (d, p) in dy.iter_mut().zip(prod.iter()) {
            *d = p * scale;
        }
    }

    /// Converts interaction-picture rows at local time `tau` to the lab frame.
    pub fn to_lab_rows(&self, tau: f64, y: &mut [C64]) {
        let m = self.m();
        let ph = self.phases(-tau);
        for row in y.chunks_mut(m) {
            row.iter_mut().zip(&ph).for_each(|(z, p)| *z *= p);
        }
    }
}

/// Options for [`schrodinger_evolve`].
#[derive(Clone, Debug)]
pub struct CoherentOptions {
    pub ode: OdeOptions,
    /// Use the one-period propagator when the drive is periodic.
    pub floquet: bool,
    /// States whose populations are recorded.
    pub tracked: Vec<StateTag>,
}

impl Default for CoherentOptions {
    fn default() -> Self {
        Self { ode: OdeOptions::coherent(), floquet: true, tracked: Vec::new() }
    }
}

/// Time series produced by the evolution routines.
#[derive(Clone, Debug, Default)]
pub struct EvolutionRecord {
    pub times: Vec<f64>,
    /// `⟨X⁻X⁺⟩`.
    pub nbar: Vec<f64>,
    /// `κ Tr[X⁻X⁺ρ]`, dissipative runs only.
    pub phi_out: Vec<f64>,
    /// Norm (coherent) or trace (dissipative).
    pub norm: Vec<f64>,
    /// Populations of the tracked states, one series per tag.
    pub populations: Vec<(StateTag, Vec<f64>)>,
    pub stats: OdeStats,
}

impl EvolutionRecord {
    fn with_tracked(tracked: &[StateTag]) -> Self {
        Self { populations: tracked.iter().map(|t| (*t, Vec::new())).collect(), ..Self::default() }
    }

    pub fn population(&self, tag: StateTag) -> Option<&[f64]> {
        self.populations.iter().find(|(t, _)| *t == tag).map(|(_, v)| v.as_slice())
    }
}

fn check_grid(t_grid: &[f64]) -> Result<()> {
    if t_grid.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
        return Err(Error::Config("time grid must be finite and non-negative".into()));
    }
    if t_grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::Config("time grid must be ascending".into()));
    }
    Ok(())
}

fn emission_number(xplus: &Array2<C64>, psi: &[C64]) -> f64 {
    let v = xplus.dot(&ArrayView2::from_shape((psi.len(), 1), psi).expect("column"));
    v.iter().map(|z| z.norm_sqr()).sum()
}

/// `⟨ψ|X⁻X⁺|ψ⟩ = ‖X⁺ψ‖²`.
pub fn nbar_pure(sub: &DressedSubspace, psi: &Array1<C64>) -> f64 {
    emission_number(sub.xplus(), psi.as_slice().expect("contiguous"))
}

/// Evolves `psi0` (lab frame, dressed basis, at `t = 0`) under
/// `H_0 + H_D(t)` and records observables at every grid time.
pub fn schrodinger_evolve(
    sub: &DressedSubspace,
    drive: Option<&DriveSpec>,
    psi0: &Array1<C64>,
    t_grid: &[f64],
    opts: &CoherentOptions,
) -> Result<EvolutionRecord> {
    let m = sub.m();
    if psi0.len() != m {
        return Err(Error::Config(format!("initial state has length {}, subspace M = {m}", psi0.len())));
    }
    let norm0 = psi0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if (norm0 - 1.0).abs() > 1e-8 {
        return Err(Error::Contract(format!("initial state must be normalized, norm {norm0}")));
    }
    check_grid(t_grid)?;
    let tracked: Vec<(StateTag, usize)> = opts
        .tracked
        .iter()
        .map(|t| sub.index_of(*t).map(|i| (*t, i)))
        .collect::<Result<_>>()?;
    let frame = Frame::new(sub, drive);
    let period = drive.and_then(drive_period);
    let segment = period.unwrap_or(8.0 * PI);
    let xplus = sub.xplus();

    let mut record = EvolutionRecord::with_tracked(&opts.tracked);
    let push = |t: f64, psi: &[C64], record: &mut EvolutionRecord| -> Result<()> {
        let norm = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > 1e-6 {
            return Err(Error::Integration { t, reason: format!("norm drifted to {norm}") });
        }
        record.times.push(t);
        record.norm.push(norm);
        record.nbar.push(emission_number(xplus, psi));
        for (slot, (_, idx)) in record.populations.iter_mut().zip(&tracked) {
            slot.1.push(psi[*idx].norm_sqr());
        }
        Ok(())
    };

    // One-period propagator, rows are images of basis states.
    let propagator = match (period, opts.floquet) {
        (Some(t_p), true) => {
            let mut rows: Vec<C64> = Array2::<C64>::eye(m).into_iter().collect();
            let mut ode = Dopri5::new(m * m, opts.ode);
            let mut f = |t: f64, y: &[C64], dy: &mut [C64]| frame.rhs_rows(t, 0.0, y, dy);
            ode.advance(&mut f, 0.0, t_p, &mut rows)?;
            frame.to_lab_rows(t_p, &mut rows);
            record.stats.evaluations += ode.stats.evaluations;
            record.stats.accepted += ode.stats.accepted;
            record.stats.rejected += ode.stats.rejected;
            // U[a][k] = rows[k][a].
            Some(Array2::from_shape_vec((m, m), rows).expect("square").reversed_axes())
        }
        _ => None,
    };

    // Lab state at the current anchor `anchor_k * segment`.
    let mut anchor_state: Vec<C64> = psi0.to_vec();
    let mut anchor_k: u64 = 0;
    // Interaction-picture state within the current segment.
    let mut local: Vec<C64> = anchor_state.clone();
    let mut local_tau = 0.0;
    let mut ode = Dopri5::new(m, opts.ode);
    let mut lab = vec![C64::new(0.0, 0.0); m];

    for &t in t_grid {
        let k = ((t / segment) * (1.0 + 1e-15)).floor() as u64;
        if k > anchor_k {
            if let Some(u) = &propagator {
                let mut v = Array1::from(anchor_state.clone());
                for _ in anchor_k..k {
                    v = u.dot(&v);
                }
                anchor_state = v.to_vec();
            } else {
                // Carry the local state to the end of its segment, then to later ones.
                for seg in anchor_k..k {
                    let t0 = seg as f64 * segment;
                    let mut f = |tt: f64, y: &[C64], dy: &mut [C64]| frame.rhs_rows(tt, t0, y, dy);
                    if seg > anchor_k {
                        local.clone_from(&anchor_state);
                        local_tau = 0.0;
                    }
                    ode.reset();
                    ode.advance(&mut f, t0 + local_tau, t0 + segment, &mut local)?;
                    frame.to_lab_rows(segment, &mut local);
                    anchor_state.clone_from(&local);
                }
            }
            anchor_k = k;
            local.clone_from(&anchor_state);
            local_tau = 0.0;
            ode.reset();
        }
        let t0 = anchor_k as f64 * segment;
        let tau = (t - t0).max(0.0);
        if tau > local_tau {
            let mut f = |tt: f64, y: &[C64], dy: &mut [C64]| frame.rhs_rows(tt, t0, y, dy);
            ode.advance(&mut f, t0 + local_tau, t0 + tau, &mut local)?;
            local_tau = tau;
        }
        lab.clone_from(&local);
        frame.to_lab_rows(local_tau, &mut lab);
        push(t, &lab, &mut record)?;
    }
    record.stats.evaluations += ode.stats.evaluations;
    record.stats.accepted += ode.stats.accepted;
    record.stats.rejected += ode.stats.rejected;
    Ok(record)
}

/// Horizon an `n̄_max` evaluation must cover: `min(1.2 π/Ξ, cap)`.
pub fn required_horizon(xi: f64, time_cap: f64) -> f64 {
    if xi > 0.0 {
        (1.2 * PI / xi).min(time_cap)
    } else {
        time_cap
    }
}

/// Largest recorded `⟨X⁻X⁺⟩`; fails when the record ends before `horizon`.
pub fn nbar_max(record: &EvolutionRecord, horizon: f64) -> Result<f64> {
    let end = record.times.last().copied().unwrap_or(0.0);
    if end + 1e-9 * horizon.max(1.0) < horizon {
        return Err(Error::Contract(format!("record ends at t = {end}, needs {horizon}")));
    }
    Ok(record.nbar.iter().copied().fold(0.0, f64::max))
}

/// Grid of drive-period multiples covering `[0, horizon]`, refined with
/// `per_period` samples inside the periods adjacent to `focus` periods.
pub fn stroboscopic_grid(period: f64, horizon: f64, focus: &[u64], per_period: usize) -> Vec<f64> {
    let n = (horizon / period).ceil() as u64;
    let mut grid: Vec<f64> = (0..=n).map(|k| k as f64 * period).collect();
    for &k in focus {
        for kk in k.saturating_sub(1)..=(k + 1).min(n.saturating_sub(1)) {
            for s in 1..per_period {
                grid.push((kk as f64 + s as f64 / per_period as f64) * period);
            }
        }
    }
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    grid
}

/// `n̄_max` over `[0, horizon]`: a stroboscopic pass followed by dense
/// sampling of the periods around the stroboscopic maximum. Returns the
/// value and the refined record.
pub fn nbar_max_search(
    sub: &DressedSubspace,
    drive: &DriveSpec,
    psi0: &Array1<C64>,
    horizon: f64,
    opts: &CoherentOptions,
) -> Result<(f64, EvolutionRecord)> {
    let period = drive_period(drive)
        .ok_or_else(|| Error::Config("n̄_max search needs commensurate drive frequencies".into()))?;
    let coarse = stroboscopic_grid(period, horizon, &[], 1);
    let rec = schrodinger_evolve(sub, Some(drive), psi0, &coarse, opts)?;
    let best = rec
        .nbar
        .iter()
        .enumerate()
        .fold((0usize, f64::NEG_INFINITY), |b, (i, &v)| if v > b.1 { (i, v) } else { b })
        .0 as u64;
    let fine = stroboscopic_grid(period, horizon, &[best], 64);
    let rec = schrodinger_evolve(sub, Some(drive), psi0, &fine, opts)?;
    Ok((nbar_max(&rec, horizon)?, rec))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rabi::ModelParams;
    use approx::assert_abs_diff_eq;

    fn subspace() -> DressedSubspace {
        let p = ModelParams::from_gc(0.9, 100.0).unwrap().with_omega_mu(-4.6).unwrap();
        DressedSubspace::from_model(&p, 128, 16).unwrap()
    }

    #[test]
    fn period_detection() {
        let d = DriveSpec::new(0.1, 0.2, 4.25, 0.25, 2, 4, 10.0).unwrap();
        assert_abs_diff_eq!(drive_period(&d).unwrap(), 8.0 * PI, epsilon = 1e-12);
        let d = DriveSpec::new(0.1, 0.2, 3.0, 1.0, 1, 2, 10.0).unwrap();
        assert_abs_diff_eq!(drive_period(&d).unwrap(), 2.0 * PI, epsilon = 1e-12);
        let d = DriveSpec::new(0.1, 0.2, 2f64.sqrt(), 1.0, 1, 2, 10.0).unwrap();
        assert!(drive_period(&d).is_none());
        let d = DriveSpec::new(0.1, 0.0, 3.0, 1.0, 1, 2, 10.0).unwrap();
        assert_abs_diff_eq!(drive_period(&d).unwrap(), 2.0 * PI / 3.0, epsilon = 1e-12);
    }

    #[test]
    fn undriven_state_is_stationary() {
        let sub = subspace();
        let i = sub.index_of(StateTag::Mu(0)).unwrap();
        let mut psi = Array1::zeros(sub.m());
        psi[i] = C64::new(1.0, 0.0);
        let opts = CoherentOptions { tracked: vec![StateTag::Mu(0)], ..Default::default() };
        let rec = schrodinger_evolve(&sub, None, &psi, &[0.0, 1.0, 50.0], &opts).unwrap();
        for p in rec.population(StateTag::Mu(0)).unwrap() {
            assert_abs_diff_eq!(*p, 1.0, epsilon = 1e-12);
        }
        assert!(rec.nbar.iter().all(|n| *n == 0.0));
    }

    #[test]
    fn floquet_matches_direct_integration() {
        let sub = subspace();
        let d = DriveSpec::new(0.05, 0.1, 4.25, 0.25, 2, 4, 1.0).unwrap();
        let i = sub.index_of(StateTag::Mu(0)).unwrap();
        let mut psi = Array1::zeros(sub.m());
        psi[i] = C64::new(1.0, 0.0);
        let grid: Vec<f64> = (0..=12).map(|k| k as f64 * 7.3).collect();
        let tracked = vec![StateTag::Mu(0), StateTag::Mu(4)];
        let a = schrodinger_evolve(&sub, Some(&d), &psi, &grid, &CoherentOptions { tracked: tracked.clone(), ..Default::default() }).unwrap();
        let b = schrodinger_evolve(&sub, Some(&d), &psi, &grid, &CoherentOptions { floquet: false, tracked, ..Default::default() }).unwrap();
        for k in 0..grid.len() {
            assert_abs_diff_eq!(a.nbar[k], b.nbar[k], epsilon = 1e-7);
            assert_abs_diff_eq!(a.populations[1].1[k], b.populations[1].1[k], epsilon = 1e-7);
            assert_abs_diff_eq!(a.norm[k], 1.0, epsilon = 1e-6);
        }
    }

    #[test]
    fn horizon_contract() {
        let rec = EvolutionRecord { times: vec![0.0, 1.0], nbar: vec![0.0, 0.5], ..Default::default() };
        assert_eq!(nbar_max(&rec, 1.0).unwrap(), 0.5);
        assert!(matches!(nbar_max(&rec, 2.0), Err(Error::Contract(_))));
        assert_abs_diff_eq!(required_horizon(1.0, 1e6), 1.2 * PI, epsilon = 1e-15);
        assert_eq!(required_horizon(0.0, 1e6), 1e6);
    }
}

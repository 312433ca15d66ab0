// Copyright 2026 The rabi-qpt Authors
// SPDX-License-Identifier: Apache-2.0

//! Dressed-basis Lindblad master equation at zero temperature, the output
//! photon rate and the driven steady state.

use std::collections::VecDeque;
use std::f64::consts::PI;

use ndarray::{Array1, Array2, ArrayView2};
use ndarray_linalg::Solve;
use num_complex::Complex64 as C64;

use crate::coherent::{drive_period, EvolutionRecord, Frame};
use crate::dressed::{DissipationParams, DressedSubspace, StateTag};
use crate::error::{Error, Result};
use crate::krylov::{gmres, GmresOptions};
use crate::linalg::herm_eig;
use crate::ode::{Dopri5, OdeOptions};
use crate::operator::Operator;
use crate::rabi::DriveSpec;

/// `Φ_out = κ Tr[X⁻X⁺ρ]`.
pub fn phi_out(rho: &Array2<C64>, xplus: &Array2<C64>, kappa: f64) -> f64 {
    let y = xplus.t().mapv(|z| z.conj()).dot(xplus);
    kappa * trace_product(&y, rho)
}

/// `Re Tr[Y ρ]`.
fn trace_product(y: &Array2<C64>, rho: &Array2<C64>) -> f64 {
    let m = rho.nrows();
    let mut acc = 0.0;
    for a in 0..m {
        for b in 0..m {
            acc += (y[[b, a]] * rho[[a, b]]).re;
        }
    }
    acc
}

/// Hermitian check, unit trace and positivity of a density matrix.
pub fn validate_density(rho: &Array2<C64>, m: usize) -> Result<()> {
    if rho.dim() != (m, m) {
        return Err(Error::Config(format!("density matrix has shape {:?}, expected {m}x{m}", rho.dim())));
    }
    let tr: C64 = rho.diag().iter().sum();
    if (tr - C64::new(1.0, 0.0)).norm() > 1e-8 {
        return Err(Error::Contract(format!("density matrix trace {tr}")));
    }
    let op = Operator::from_matrix(rho.clone())?;
    if !op.is_hermitian() {
        return Err(Error::Contract("density matrix is not Hermitian".into()));
    }
    let min = herm_eig(&op)?.values[0];
    if min < -1e-10 {
        return Err(Error::Contract(format!("density matrix has eigenvalue {min}")));
    }
    Ok(())
}

/// Smallest eigenvalue of the Hermitian part of `rho`.
pub fn min_eigenvalue(rho: &Array2<C64>) -> Result<f64> {
    let h = (rho + &rho.t().mapv(|z| z.conj())) * C64::new(0.5, 0.0);
    Ok(herm_eig(&Operator::from_matrix(h)?)?.values[0])
}

/// `|ψ⟩⟨ψ|` for a retained state.
pub fn pure_density(sub: &DressedSubspace, tag: StateTag) -> Result<Array2<C64>> {
    let i = sub.index_of(tag)?;
    let mut rho = Array2::zeros((sub.m(), sub.m()));
    rho[[i, i]] = C64::new(1.0, 0.0);
    Ok(rho)
}

/// Interaction-picture Liouvillian.
struct Liouvillian {
    frame: Frame,
    decay: Vec<f64>,
    transfers: Vec<(usize, usize, f64)>,
}

impl Liouvillian {
    fn new(sub: &DressedSubspace, drive: Option<&DriveSpec>, diss: &DissipationParams) -> Self {
        let m = sub.m();
        let mut decay = vec![0.0; m];
        let mut agg = Array2::<f64>::zeros((m, m));
        for r in sub.lindblad_rates(diss) {
            decay[r.from] += r.rate;
            agg[[r.from, r.to]] += r.rate;
        }
        let transfers = agg
            .indexed_iter()
            .filter(|(_, v)| **v > 0.0)
            .map(|((j, jp), v)| (j, jp, *v))
            .collect();
        Self { frame: Frame::new(sub, drive), decay, transfers }
    }

    fn m(&self) -> usize {
        self.frame.m()
    }

    fn rhs(&self, t: f64, t_ref: f64, y: &[C64], dy: &mut [C64]) {
        let m = self.m();
        let rho = ArrayView2::from_shape((m, m), y).expect("square");
        let f = self.frame.coefficient(t);
        if f != 0.0 {
            let w = self.frame.rotated(t - t_ref).dot(&rho);
            let scale = C64::new(0.0, -f);
            for a in 0..m {
                for b in 0..m {
                    dy[a * m + b] = (w[[a, b]] - w[[b, a]].conj()) * scale;
                }
            }
        } else {
            dy.iter_mut().for_each(|z| *z = C64::new(0.0, 0.0));
        }
        for a in 0..m {
            for b in 0..m {
                let g = 0.5 * (self.decay[a] + self.decay[b]);
                if g != 0.0 {
                    dy[a * m + b] -= y[a * m + b] * g;
                }
            }
        }
        for &(j, jp, rate) in &self.transfers {
            dy[jp * m + jp] += y[j * m + j] * rate;
        }
    }

    /// Interaction picture at local time `tau` → lab frame.
    fn to_lab(&self, tau: f64, y: &mut [C64]) {
        let m = self.m();
        let ph = self.frame.phases(-tau);
        for a in 0..m {
            for b in 0..m {
                y[a * m + b] *= ph[a] * ph[b].conj();
            }
        }
    }
}

/// Options for [`master_evolve`].
#[derive(Clone, Debug)]
pub struct MasterOptions {
    pub ode: OdeOptions,
    pub tracked: Vec<StateTag>,
}

impl Default for MasterOptions {
    fn default() -> Self {
        Self { ode: OdeOptions::dissipative(), tracked: Vec::new() }
    }
}

struct Observer {
    y: Array2<C64>,
    kappa: f64,
    tracked: Vec<usize>,
}

impl Observer {
    fn record(&self, t: f64, rho: &[C64], rec: &mut EvolutionRecord) -> Result<()> {
        let m = self.y.nrows();
        let r = ArrayView2::from_shape((m, m), rho).expect("square").to_owned();
        let tr: f64 = (0..m).map(|a| r[[a, a]].re).sum();
        if (tr - 1.0).abs() > 1e-6 {
            return Err(Error::Integration { t, reason: format!("trace drifted to {tr}") });
        }
        let n = trace_product(&self.y, &r);
        rec.times.push(t);
        rec.norm.push(tr);
        rec.nbar.push(n);
        rec.phi_out.push(self.kappa * n);
        for (slot, idx) in rec.populations.iter_mut().zip(&self.tracked) {
            slot.1.push(r[[*idx, *idx]].re);
        }
        Ok(())
    }
}

/// Integrates the master equation from `rho0` at `t = 0` and records
/// observables at every grid time.
pub fn master_evolve(
    sub: &DressedSubspace,
    drive: Option<&DriveSpec>,
    rho0: &Array2<C64>,
    t_grid: &[f64],
    diss: &DissipationParams,
    opts: &MasterOptions,
) -> Result<EvolutionRecord> {
    let m = sub.m();
    validate_density(rho0, m)?;
    if t_grid.iter().any(|t| !(t.is_finite() && *t >= 0.0)) || t_grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::Config("time grid must be ascending, finite and non-negative".into()));
    }
    let tracked = opts
        .tracked
        .iter()
        .map(|t| sub.index_of(*t))
        .collect::<Result<Vec<_>>>()?;
    let obs = Observer { y: sub.emission_number(), kappa: diss.kappa, tracked };
    let liou = Liouvillian::new(sub, drive, diss);
    let segment = drive.and_then(drive_period).unwrap_or(8.0 * PI);

    let mut rec = EvolutionRecord {
        populations: opts.tracked.iter().map(|t| (*t, Vec::new())).collect(),
        ..Default::default()
    };
    let mut anchor: Vec<C64> = rho0.iter().copied().collect();
    let mut anchor_k: u64 = 0;
    let mut local = anchor.clone();
    let mut local_tau = 0.0;
    let mut ode = Dopri5::new(m * m, opts.ode);
    let mut lab = anchor.clone();
    for &t in t_grid {
        let k = ((t / segment) * (1.0 + 1e-15)).floor() as u64;
        for seg in anchor_k..k {
            let t0 = seg as f64 * segment;
            if seg > anchor_k {
                local.clone_from(&anchor);
                local_tau = 0.0;
            }
            let mut f = |tt: f64, y: &[C64], dy: &mut [C64]| liou.rhs(tt, t0, y, dy);
            ode.reset();
            ode.advance(&mut f, t0 + local_tau, t0 + segment, &mut local)?;
            liou.to_lab(segment, &mut local);
            anchor.clone_from(&local);
        }
        if k > anchor_k {
            anchor_k = k;
            local.clone_from(&anchor);
            local_tau = 0.0;
            ode.reset();
        }
        let t0 = anchor_k as f64 * segment;
        let tau = (t - t0).max(0.0);
        if tau > local_tau {
            let mut f = |tt: f64, y: &[C64], dy: &mut [C64]| liou.rhs(tt, t0, y, dy);
            ode.advance(&mut f, t0 + local_tau, t0 + tau, &mut local)?;
            local_tau = tau;
        }
        lab.clone_from(&local);
        liou.to_lab(local_tau, &mut lab);
        obs.record(t, &lab, &mut rec)?;
    }
    rec.stats = ode.stats;
    Ok(rec)
}

/// How the steady state was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SteadyMethod {
    /// Fixed point of the one-period map of the full time-dependent master
    /// equation, found with restarted GMRES. This is the `t → ∞` limit of
    /// stroboscopic integration.
    Shooting,
    /// Long-time integration of the full time-dependent master equation.
    Integration,
    /// Null vector of the rotating-frame Liouvillian keeping only exactly
    /// resonant drive terms.
    RotatingFrame,
}

impl SteadyMethod {
    pub fn label(&self) -> &'static str {
        match self {
            SteadyMethod::Shooting => "periodic shooting (GMRES on the one-period map)",
            SteadyMethod::Integration => "long-time integration",
            SteadyMethod::RotatingFrame => "rotating-frame null vector",
        }
    }
}

/// Initial state of the iteration.
#[derive(Clone, Debug)]
pub enum Seed {
    /// `|μ₀⟩⟨μ₀|`.
    Mu0,
    Given(Array2<C64>),
    /// The rotating-frame null vector on the lowest `m` states.
    RotatingFrame { m: usize },
}

/// Options for [`steady_state`].
#[derive(Clone, Debug)]
pub struct SteadyStateOptions {
    pub method: SteadyMethod,
    pub seed: Seed,
    /// Integrator settings for long-time integration.
    pub ode: OdeOptions,
    /// Integrator settings for the one-period map used by shooting.
    pub shooting_ode: OdeOptions,
    pub gmres: GmresOptions,
    /// Periods integrated before shooting starts.
    pub warmup_periods: usize,
    /// Convergence window; `10 / min(κ, γ₁, γ₂)` when `None`.
    pub window: Option<f64>,
    /// Allowed relative spread of period-averaged `Φ_out` over the window.
    pub rel_tol: f64,
    /// Absolute floor on that spread.
    pub abs_tol: f64,
    pub max_time: f64,
    pub samples_per_period: usize,
    /// Detuning below which a drive term counts as resonant.
    pub resonance_tol: f64,
}

impl Default for SteadyStateOptions {
    fn default() -> Self {
        Self {
            method: SteadyMethod::Shooting,
            seed: Seed::Mu0,
            ode: OdeOptions::dissipative(),
            shooting_ode: OdeOptions { rtol: 1e-8, atol: 1e-11, ..OdeOptions::dissipative() },
            gmres: GmresOptions { restart: 40, max_matvec: 600, abs_tol: 1e-8 },
            warmup_periods: 4,
            window: None,
            rel_tol: 1e-3,
            abs_tol: 1e-11,
            max_time: 1e5,
            samples_per_period: 16,
            resonance_tol: 1e-6,
        }
    }
}

/// A converged steady state.
#[derive(Clone, Debug)]
pub struct SteadyState {
    /// Lab-frame density matrix at a period boundary.
    pub rho: Array2<C64>,
    /// Period-averaged `Φ_out`.
    pub phi_out: f64,
    pub method: SteadyMethod,
    /// Integrated time (integration) or number of one-period maps
    /// (shooting) times the period.
    pub t_final: f64,
    pub window: f64,
    /// Period averages over the final window.
    pub block_means: Vec<f64>,
    pub min_eigenvalue: f64,
    /// `‖P(ρ) − ρ‖_F` for the one-period map `P` (shooting only).
    pub residual: Option<f64>,
}

/// Rotating-frame null vector on the lowest `m_seed` states, zero-padded to
/// the full subspace.
pub fn rotating_frame_state(
    sub: &DressedSubspace,
    drive: Option<&DriveSpec>,
    diss: &DissipationParams,
    m_seed: usize,
    resonance_tol: f64,
) -> Result<Array2<C64>> {
    let m_full = sub.m();
    let m = m_seed.min(m_full);
    if m == 0 {
        return Err(Error::Config("rotating-frame state needs at least one level".into()));
    }
    if m > 48 {
        return Err(Error::Config(format!("rotating-frame solve limited to 48 levels, asked for {m}")));
    }
    let e = sub.energies();
    let v = sub.drive_coupling();
    let mut h = Array2::<C64>::zeros((m, m));
    if let Some(d) = drive {
        for a in 0..m {
            for c in 0..m {
                let delta = e[a] - e[c];
                let mut amp = 0.0;
                for (omega_d, w) in [(d.amp_p, d.freq_p), (d.amp_s, d.freq_s)] {
                    for s in [1.0, -1.0] {
                        if (delta + s * w).abs() < resonance_tol {
                            amp += 0.5 * omega_d;
                        }
                    }
                }
                h[[a, c]] = v[[a, c]] * amp;
            }
        }
    }
    let mut decay = vec![0.0; m];
    let mut transfers = Vec::new();
    for r in sub.lindblad_rates(diss) {
        if r.from < m {
            decay[r.from] += r.rate;
            transfers.push((r.from, r.to, r.rate));
        }
    }
    let n = m * m;
    let mut l = Array2::<C64>::zeros((n, n));
    let i = C64::new(0.0, 1.0);
    for a in 0..m {
        for b in 0..m {
            let row = a * m + b;
            for c in 0..m {
                l[[row, c * m + b]] -= i * h[[a, c]];
                l[[row, a * m + c]] += i * h[[c, b]];
            }
            l[[row, row]] -= C64::new(0.5 * (decay[a] + decay[b]), 0.0);
        }
    }
    for (j, jp, rate) in transfers {
        l[[jp * m + jp, j * m + j]] += C64::new(rate, 0.0);
    }
    for col in 0..n {
        l[[0, col]] = C64::new(0.0, 0.0);
    }
    for c in 0..m {
        l[[0, c * m + c]] = C64::new(1.0, 0.0);
    }
    let mut rhs = Array1::<C64>::zeros(n);
    rhs[0] = C64::new(1.0, 0.0);
    let x = l.solve_into(rhs)?;
    let mut rho = Array2::<C64>::zeros((m_full, m_full));
    for a in 0..m {
        for b in 0..m {
            rho[[a, b]] = 0.5 * (x[a * m + b] + x[b * m + a].conj());
        }
    }
    let tr: f64 = (0..m).map(|a| rho[[a, a]].re).sum();
    if !(tr.is_finite() && tr > 0.0) {
        return Err(Error::Numeric("rotating-frame null vector has no trace".into()));
    }
    rho.mapv_inplace(|z| z / tr);
    Ok(rho)
}

/// Driven steady state.
///
/// Shooting solves `P(ρ) = ρ` for the one-period map `P` of the exact
/// time-dependent equation. Long-time integration runs period by period and
/// stops once the period averages of `Φ_out` over the final window agree.
/// Metastable states with lifetimes far beyond `max_time` defeat the latter.
pub fn steady_state(
    sub: &DressedSubspace,
    drive: Option<&DriveSpec>,
    diss: &DissipationParams,
    opts: &SteadyStateOptions,
) -> Result<SteadyState> {
    let m = sub.m();
    let min_rate = diss
        .min_rate()
        .ok_or_else(|| Error::Config("steady state needs a nonzero dissipation rate".into()))?;
    let window = opts.window.unwrap_or(10.0 / min_rate);
    let period = drive.and_then(drive_period).unwrap_or(8.0 * PI);
    let samples = opts.samples_per_period.max(1);
    let y = sub.emission_number();
    let liou = Liouvillian::new(sub, drive, diss);
    let stepper = PeriodStepper { liou: &liou, y: &y, kappa: diss.kappa, period, samples };

    if opts.method == SteadyMethod::RotatingFrame {
        let rho = rotating_frame_state(sub, drive, diss, m, opts.resonance_tol)?;
        let mut flat: Vec<C64> = rho.iter().copied().collect();
        let phi = stepper.unitary_average(&mut flat);
        return Ok(SteadyState {
            min_eigenvalue: min_eigenvalue(&rho)?,
            rho,
            phi_out: phi,
            method: SteadyMethod::RotatingFrame,
            t_final: 0.0,
            window: 0.0,
            block_means: vec![phi],
            residual: None,
        });
    }

    let rho0 = match &opts.seed {
        Seed::Mu0 => pure_density(sub, StateTag::Mu(0))?,
        Seed::Given(r) => {
            validate_density(r, m)?;
            r.clone()
        }
        Seed::RotatingFrame { m: ms } => rotating_frame_state(sub, drive, diss, *ms, opts.resonance_tol)?,
    };
    let mut state: Vec<C64> = rho0.iter().copied().collect();

    if opts.method == SteadyMethod::Shooting {
        let mut ode = Dopri5::new(m * m, opts.shooting_ode);
        for _ in 0..opts.warmup_periods {
            stepper.advance(&mut ode, &mut state)?;
        }
        let mut image = state.clone();
        stepper.map(&mut ode, &mut image)?;
        let b: Vec<C64> = image.iter().zip(&state).map(|(p, x)| p - x).collect();
        let mut delta = vec![C64::new(0.0, 0.0); m * m];
        let mut buf = vec![C64::new(0.0, 0.0); m * m];
        let stats = gmres(
            |v, out| {
                buf.copy_from_slice(v);
                stepper.map(&mut ode, &mut buf)?;
                for i in 0..v.len() {
                    out[i] = v[i] - buf[i];
                }
                Ok(())
            },
            &b,
            &mut delta,
            &opts.gmres,
        )
        .map_err(|e| Error::SteadyState {
            t_final: period * opts.warmup_periods as f64,
            reason: format!("periodic shooting failed: {e}"),
            last_phi: Vec::new(),
        })?;
        let mut rho = Array2::from_shape_fn((m, m), |(a, c)| state[a * m + c] + delta[a * m + c]);
        let herm = rho.t().mapv(|z| z.conj());
        rho = (&rho + &herm) * C64::new(0.5, 0.0);
        let tr: f64 = (0..m).map(|a| rho[[a, a]].re).sum();
        rho.mapv_inplace(|z| z / tr);
        let mut flat: Vec<C64> = rho.iter().copied().collect();
        let start = flat.clone();
        let phi = stepper.advance(&mut ode, &mut flat)?;
        let residual = flat.iter().zip(&start).map(|(a, c)| (a - c).norm_sqr()).sum::<f64>().sqrt();
        return Ok(SteadyState {
            min_eigenvalue: min_eigenvalue(&rho)?,
            rho,
            phi_out: phi,
            method: SteadyMethod::Shooting,
            t_final: period * (opts.warmup_periods + stats.matvecs + 2) as f64,
            window: period,
            block_means: vec![phi],
            residual: Some(residual),
        });
    }

    let mut ode = Dopri5::new(m * m, opts.ode);
    let mut blocks: VecDeque<(f64, f64)> = VecDeque::new();
    let mut t0 = 0.0;
    loop {
        let mean = stepper.advance(&mut ode, &mut state)?;
        t0 += period;
        blocks.push_back((t0, mean));
        while blocks.front().is_some_and(|(t, _)| *t < t0 - window) {
            blocks.pop_front();
        }
        if t0 >= window {
            let (lo, hi, sum) = blocks
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY, 0.0), |(lo, hi, s), (_, v)| (lo.min(*v), hi.max(*v), s + v));
            let mean = sum / blocks.len() as f64;
            if hi - lo <= opts.rel_tol * mean.abs() + opts.abs_tol {
                let rho = Array2::from_shape_vec((m, m), state).expect("square");
                let phi = blocks.back().map(|b| b.1).unwrap_or(0.0);
                return Ok(SteadyState {
                    min_eigenvalue: min_eigenvalue(&rho)?,
                    rho,
                    phi_out: phi,
                    method: SteadyMethod::Integration,
                    t_final: t0,
                    window,
                    block_means: blocks.iter().map(|b| b.1).collect(),
                    residual: None,
                });
            }
        }
        if t0 >= opts.max_time {
            let last: Vec<f64> = blocks.iter().rev().take(10).map(|b| b.1).collect();
            return Err(Error::SteadyState {
                t_final: t0,
                reason: format!("period-averaged Φ_out still varies over a window of {window}"),
                last_phi: last,
            });
        }
    }
}

/// One-period propagation of a lab-frame density matrix taken at a period
/// boundary.
struct PeriodStepper<'a> {
    liou: &'a Liouvillian,
    y: &'a Array2<C64>,
    kappa: f64,
    period: f64,
    samples: usize,
}

impl PeriodStepper<'_> {
    fn phi(&self, lab: &[C64]) -> f64 {
        let m = self.y.nrows();
        let r = ArrayView2::from_shape((m, m), lab).expect("square");
        let mut acc = 0.0;
        for a in 0..m {
            for b in 0..m {
                acc += (self.y[[b, a]] * r[[a, b]]).re;
            }
        }
        self.kappa * acc
    }

    /// Applies the one-period map in place.
    fn map(&self, ode: &mut Dopri5, state: &mut [C64]) -> Result<()> {
        let mut f = |tt: f64, yy: &[C64], dy: &mut [C64]| self.liou.rhs(tt, 0.0, yy, dy);
        ode.reset();
        ode.advance(&mut f, 0.0, self.period, state)?;
        self.liou.to_lab(self.period, state);
        Ok(())
    }

    /// Advances one period, checks the trace and returns the period average
    /// of `Φ_out`.
    fn advance(&self, ode: &mut Dopri5, state: &mut [C64]) -> Result<f64> {
        let m = self.y.nrows();
        let mut lab = state.to_vec();
        let mut acc = 0.0;
        ode.reset();
        for s in 1..=self.samples {
            let from = self.period * (s - 1) as f64 / self.samples as f64;
            let tau = self.period * s as f64 / self.samples as f64;
            let mut f = |tt: f64, yy: &[C64], dy: &mut [C64]| self.liou.rhs(tt, 0.0, yy, dy);
            ode.advance(&mut f, from, tau, state)?;
            lab.copy_from_slice(state);
            self.liou.to_lab(tau, &mut lab);
            let tr: f64 = (0..m).map(|a| lab[a * m + a].re).sum();
            if (tr - 1.0).abs() > 1e-6 {
                return Err(Error::Integration { t: tau, reason: format!("trace drifted to {tr}") });
            }
            acc += self.phi(&lab);
        }
        state.copy_from_slice(&lab);
        Ok(acc / self.samples as f64)
    }

    /// Period average of `Φ_out` for a state that only rotates with `H₀`.
    fn unitary_average(&self, state: &mut [C64]) -> f64 {
        let mut lab = state.to_vec();
        let mut acc = 0.0;
        for s in 0..self.samples {
            lab.copy_from_slice(state);
            self.liou.to_lab(self.period * s as f64 / self.samples as f64, &mut lab);
            acc += self.phi(&lab);
        }
        acc / self.samples as f64
    }
}

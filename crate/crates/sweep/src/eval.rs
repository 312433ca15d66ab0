// Copyright 2026 The rabi-qpt Authors
// SPDX-License-Identifier: Apache-2.0

//! Evaluation of a single sweep point.

use ndarray::Array1;
use num_complex::Complex64 as C64;
use serde::Serialize;

use rabi_core::analytics::{c2k_closed, critical_quantities, nmax_e, Phase};
use rabi_core::coherent::{nbar_max_search, required_horizon, CoherentOptions};
use rabi_core::dressed::DissipationParams;
use rabi_core::master::{steady_state, Seed, SteadyMethod, SteadyStateOptions};
use rabi_core::rabi::{
    ck_converged, default_delta, dnbar0_dgc, nbar0_converged, DerivativeReport, ModelParams, TruncationPolicy,
};
use rabi_core::scenario::{Scenario, ScenarioSpec};

use crate::config::{Quantity, SteadyMethodName, SweepSpec};

/// One `(g_c, Ω/ω, l)` evaluation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PointTask {
    pub gc: f64,
    pub ratio: f64,
    pub l: u32,
}

/// Outcome of a point.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum Status {
    Ok,
    Failed(String),
}

impl Status {
    pub fn label(&self) -> String {
        match self {
            Status::Ok => "ok".into(),
            Status::Failed(m) => format!("failed: {m}"),
        }
    }

    pub fn is_ok(&self) -> bool {
        matches!(self, Status::Ok)
    }
}

/// One output row.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PointRecord {
    pub gc: f64,
    pub ratio: f64,
    /// Sub-series label, e.g. `l=2` or `k=3`.
    pub series: String,
    pub value: Option<f64>,
    /// Right-hand one-sided value where a stencil straddles `g_c = 1`.
    pub value_right: Option<f64>,
    /// Closed-form or effective-theory counterpart, when one exists.
    pub reference: Option<f64>,
    pub n_fock: Option<usize>,
    pub dressed_m: Option<usize>,
    pub converged: bool,
    pub status: Status,
    /// Free-form diagnostics for run.meta.
    pub note: Option<String>,
    /// Seconds spent on this point.
    pub wall_time: f64,
}

impl PointRecord {
    pub fn new(task: &PointTask, series: impl Into<String>) -> Self {
        Self {
            gc: task.gc,
            ratio: task.ratio,
            series: series.into(),
            value: None,
            value_right: None,
            reference: None,
            n_fock: None,
            dressed_m: None,
            converged: true,
            status: Status::Ok,
            note: None,
            wall_time: 0.0,
        }
    }

    pub fn failed(task: &PointTask, series: impl Into<String>, reason: String) -> Self {
        Self { status: Status::Failed(reason), converged: false, ..Self::new(task, series) }
    }
}

/// Series labels produced for a task.
pub fn series_labels(spec: &SweepSpec, l: u32) -> Vec<String> {
    match spec.quantity {
        Quantity::C2k => (0..=spec.numerics.k_max).map(|k| format!("k={k}")).collect(),
        q if q.is_driven() => vec![format!("l={l}")],
        q => vec![q.name().to_string()],
    }
}

fn policy(spec: &SweepSpec) -> TruncationPolicy {
    TruncationPolicy { n_fock: spec.numerics.n_fock, check: spec.numerics.truncation_check, ..Default::default() }
}

fn scenario(spec: &SweepSpec, task: &PointTask, m: usize) -> rabi_core::Result<Scenario> {
    Scenario::build(ScenarioSpec {
        gc: task.gc,
        ratio: task.ratio,
        l: task.l,
        n_d: Some(spec.n_d_for(task.l)),
        pump_fraction: spec.pump_fraction,
        stokes_ratio: spec.stokes_ratio,
        n_fock: spec.numerics.n_fock,
        m,
    })
}

fn closed_nbar0(gc: f64, ratio: f64) -> Option<f64> {
    let p = critical_quantities(gc, ratio).ok()?;
    match p.phase {
        Phase::Normal => Some(p.r_np().ok()?.sinh().powi(2)),
        Phase::Superradiant => Some(p.alpha().ok()?.powi(2) + p.r_sp().ok()?.sinh().powi(2)),
        Phase::Critical => None,
    }
}

/// Steady-state output rate of one setup.
pub fn phi_out_point(spec: &SweepSpec, task: &PointTask, m: usize) -> rabi_core::Result<(f64, Scenario, String)> {
    let sc = scenario(spec, task, m)?;
    let d = &spec.dissipation;
    let diss = DissipationParams::new(d.kappa, d.gamma1, d.gamma2)?;
    let n = &spec.numerics;
    let opts = SteadyStateOptions {
        method: match n.steady_method {
            SteadyMethodName::Shooting => SteadyMethod::Shooting,
            SteadyMethodName::Integration => SteadyMethod::Integration,
            SteadyMethodName::RotatingFrame => SteadyMethod::RotatingFrame,
        },
        seed: n.seed_m.map_or(Seed::Mu0, |m| Seed::RotatingFrame { m }),
        max_time: n.ss_max_time,
        rel_tol: n.ss_rel_tol,
        ..Default::default()
    };
    let ss = steady_state(&sc.subspace, Some(&sc.drive), &diss, &opts)?;
    let mut note = format!("method: {}; t_final: {}", ss.method.label(), ss.t_final);
    if let Some(r) = ss.residual {
        note.push_str(&format!("; period-map residual {r:.2e}"));
    }
    if ss.min_eigenvalue < -1e-8 {
        note.push_str(&format!("; min eigenvalue {:.3e}", ss.min_eigenvalue));
    }
    if !sc.subspace.degenerate_pairs().is_empty() {
        note.push_str(&format!("; {} degenerate pairs in X+", sc.subspace.degenerate_pairs().len()));
    }
    Ok((ss.phi_out, sc, note))
}

/// Evaluates one task, producing one record per series label.
pub fn evaluate(spec: &SweepSpec, task: &PointTask) -> Vec<PointRecord> {
    let labels = series_labels(spec, task.l);
    let started = std::time::Instant::now();
    let mut out = match evaluate_inner(spec, task, &labels) {
        Ok(records) => records,
        Err(e) => labels.iter().map(|s| PointRecord::failed(task, s.clone(), e.to_string())).collect(),
    };
    let wall = started.elapsed().as_secs_f64();
    for r in &mut out {
        r.wall_time = wall;
    }
    out
}

fn evaluate_inner(spec: &SweepSpec, task: &PointTask, labels: &[String]) -> rabi_core::Result<Vec<PointRecord>> {
    let mut rec = PointRecord::new(task, labels[0].clone());
    match spec.quantity {
        Quantity::Nbar0 => {
            let p = ModelParams::from_gc(task.gc, task.ratio)?;
            let c = nbar0_converged(&p, &policy(spec))?;
            rec.value = Some(c.value);
            rec.n_fock = Some(c.n_fock);
            rec.converged = c.converged;
            rec.reference = closed_nbar0(task.gc, task.ratio);
            Ok(vec![rec])
        }
        Quantity::Dnbar0 => {
            let p = ModelParams::from_gc(task.gc, task.ratio)?;
            let delta = spec.numerics.delta.unwrap_or_else(|| default_delta(task.gc));
            match dnbar0_dgc(&p, &policy(spec), delta)? {
                DerivativeReport::Central(v) => rec.value = Some(v),
                DerivativeReport::Straddle { left, right } => {
                    rec.value = Some(left);
                    rec.value_right = Some(right);
                }
            }
            rec.note = Some(format!("delta: {delta}"));
            Ok(vec![rec])
        }
        Quantity::C2k => {
            let p = ModelParams::from_gc(task.gc, task.ratio)?;
            let k_max = spec.numerics.k_max;
            let c = ck_converged(&p, &policy(spec), 2 * k_max)?;
            let point = critical_quantities(task.gc, task.ratio)?;
            Ok(labels
                .iter()
                .enumerate()
                .map(|(k, label)| {
                    let mut r = PointRecord::new(task, label.clone());
                    r.value = Some(c.value[2 * k].abs());
                    r.reference = c2k_closed(k, &point).ok();
                    r.n_fock = Some(c.n_fock);
                    r.converged = c.converged;
                    r
                })
                .collect())
        }
        Quantity::NmaxE => {
            let sc = scenario(spec, task, 2 * task.l as usize + 1)?;
            rec.value = Some(nmax_e(&sc.triple, task.l, Some(spec.time_cap))?);
            rec.n_fock = Some(sc.n_fock);
            Ok(vec![rec])
        }
        Quantity::Nmax => {
            let m = spec.numerics.dressed_m;
            let sc = scenario(spec, task, m)?;
            let horizon = required_horizon(sc.triple.xi, spec.time_cap);
            let mut psi = Array1::zeros(m);
            psi[sc.mu0()] = C64::new(1.0, 0.0);
            let (v, _) = nbar_max_search(&sc.subspace, &sc.drive, &psi, horizon, &CoherentOptions::default())?;
            rec.value = Some(v);
            rec.reference = Some(nmax_e(&sc.triple, task.l, Some(spec.time_cap))?);
            rec.n_fock = Some(sc.n_fock);
            rec.dressed_m = Some(m);
            rec.note = Some(format!("horizon: {horizon}"));
            Ok(vec![rec])
        }
        Quantity::PhiOutSs | Quantity::DphiOutSs => {
            let m = spec.numerics.dressed_m;
            let (phi, sc, mut note) = phi_out_point(spec, task, m)?;
            rec.value = Some(phi);
            rec.n_fock = Some(sc.n_fock);
            rec.dressed_m = Some(m);
            if spec.numerics.m_doubling_check {
                let (phi2, _, _) = phi_out_point(spec, task, 2 * m)?;
                let rel = (phi2 - phi).abs() / phi.abs().max(phi2.abs()).max(1e-300);
                rec.converged = rel <= 1e-2 || (phi2 - phi).abs() <= 1e-9;
                note.push_str(&format!("; 2M value {phi2:.6e}"));
            }
            rec.note = Some(note);
            Ok(vec![rec])
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::preset;
    use crate::grid::GcGrid;

    #[test]
    fn nbar0_vanishes_at_zero_coupling() {
        let spec = SweepSpec { gc: GcGrid::Values(vec![0.0]), ..SweepSpec::default() };
        for ratio in [1e2, 1e4, 1e6] {
            let r = evaluate(&spec, &PointTask { gc: 0.0, ratio, l: 2 });
            assert_eq!(r[0].value, Some(0.0));
            assert!(r[0].status.is_ok());
        }
    }

    #[test]
    fn c2k_rows_carry_closed_forms() {
        let spec = SweepSpec { quantity: Quantity::C2k, ..preset("fig2b").unwrap() };
        let r = evaluate(&spec, &PointTask { gc: 0.6, ratio: 1e6, l: 2 });
        assert_eq!(r.len(), 6);
        for row in &r {
            let (v, c) = (row.value.unwrap(), row.reference.unwrap());
            assert!((v - c).abs() <= 1e-2 * c, "{row:?}");
        }
    }

    #[test]
    fn failures_are_recorded() {
        let spec = SweepSpec { quantity: Quantity::NmaxE, ..SweepSpec::default() };
        let r = evaluate(&spec, &PointTask { gc: 0.9, ratio: -1.0, l: 2 });
        assert!(!r[0].status.is_ok());
        assert!(r[0].value.is_none());
    }
}

// Copyright 2026 The rabi-qpt Authors
// SPDX-License-Identifier: Apache-2.0

//! Parallel sweeps and finite-difference derivative series.

use rayon::prelude::*;
use serde::Serialize;

use crate::config::{Quantity, SweepSpec};
use crate::error::{Result, SweepError};
use crate::eval::{evaluate, PointRecord, PointTask, Status};

/// All records of a sweep, ordered by ratio, then `g_c`, then series.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepResult {
    pub quantity: Quantity,
    pub records: Vec<PointRecord>,
}

impl SweepResult {
    pub fn failures(&self) -> usize {
        self.records.iter().filter(|r| !r.status.is_ok()).count()
    }

    /// Rows of one `(ratio, series)` curve in `g_c` order.
    pub fn curve(&self, ratio: f64, series: &str) -> Vec<&PointRecord> {
        self.records.iter().filter(|r| r.ratio == ratio && r.series == series).collect()
    }
}

/// Grid tasks in output order.
pub fn tasks(spec: &SweepSpec) -> Result<Vec<PointTask>> {
    let gcs = spec.gc.points()?;
    let ls: Vec<u32> = if spec.quantity.is_driven() { spec.ls.clone() } else { vec![spec.ls[0]] };
    let mut out = Vec::new();
    for &ratio in &spec.ratios {
        for &gc in &gcs {
            for &l in &ls {
                out.push(PointTask { gc, ratio, l });
            }
        }
    }
    Ok(out)
}

/// Runs the sweep with the built-in evaluator.
pub fn run_sweep(spec: &SweepSpec) -> Result<SweepResult> {
    run_sweep_with(spec, |t| evaluate(spec, t))
}

/// Runs the sweep with a custom evaluator on `spec.jobs` workers. Failed
/// points are kept as flagged rows; the call errors only when every point
/// fails. Derivative quantities are differentiated after evaluation.
pub fn run_sweep_with<F>(spec: &SweepSpec, eval: F) -> Result<SweepResult>
where
    F: Fn(&PointTask) -> Vec<PointRecord> + Sync,
{
    spec.validate()?;
    let tasks = tasks(spec)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(spec.jobs)
        .build()
        .map_err(|e| SweepError::Config(format!("cannot start {} workers: {e}", spec.jobs)))?;
    let nested: Vec<Vec<PointRecord>> = pool.install(|| tasks.par_iter().map(&eval).collect());
    let records: Vec<PointRecord> = nested.into_iter().flatten().collect();
    if !records.is_empty() && records.iter().all(|r| !r.status.is_ok()) {
        let first = match &records[0].status {
            Status::Failed(m) => m.clone(),
            Status::Ok => unreachable!(),
        };
        return Err(SweepError::AllFailed(first));
    }
    let result = SweepResult { quantity: spec.quantity, records };
    if spec.quantity == Quantity::DphiOutSs {
        return derivative_series(&result);
    }
    Ok(result)
}

/// Three-point derivative on a possibly non-uniform grid.
fn three_point(x: [f64; 3], f: [f64; 3]) -> f64 {
    let h1 = x[1] - x[0];
    let h2 = x[2] - x[1];
    -h2 / (h1 * (h1 + h2)) * f[0] + (h2 - h1) / (h1 * h2) * f[1] + h1 / (h2 * (h1 + h2)) * f[2]
}

/// `dv/dg_c` of every `(ratio, series)` curve. The grid is split into
/// `g_c < 1` and `g_c ≥ 1`; each segment uses three-point differences in its
/// interior and one-sided differences at its ends, so no stencil crosses
/// `g_c = 1`. Failed rows stay failed and are skipped by their neighbours.
pub fn derivative_series(result: &SweepResult) -> Result<SweepResult> {
    let quantity = match result.quantity {
        Quantity::PhiOutSs | Quantity::DphiOutSs => Quantity::DphiOutSs,
        Quantity::Nbar0 | Quantity::Dnbar0 => Quantity::Dnbar0,
        q => q,
    };
    let mut out = result.records.clone();
    for r in &mut out {
        r.value_right = None;
        r.reference = None;
        if r.status.is_ok() {
            r.value = None;
        }
    }
    let mut keys: Vec<(f64, String)> = Vec::new();
    for r in &result.records {
        if !keys.iter().any(|(ratio, s)| *ratio == r.ratio && *s == r.series) {
            keys.push((r.ratio, r.series.clone()));
        }
    }
    for (ratio, series) in keys {
        for side in [false, true] {
            let idx: Vec<usize> = result
                .records
                .iter()
                .enumerate()
                .filter(|(_, r)| r.ratio == ratio && r.series == series && (r.gc >= 1.0) == side)
                .filter(|(_, r)| r.status.is_ok() && r.value.is_some())
                .map(|(i, _)| i)
                .collect();
            if idx.is_empty() {
                continue;
            }
            if idx.len() < 3 {
                return Err(SweepError::Config(format!(
                    "derivative needs at least 3 points on the {} side of g_c = 1 (ratio {ratio}, {series}), got {}",
                    if side { "superradiant" } else { "normal" },
                    idx.len()
                )));
            }
            let x: Vec<f64> = idx.iter().map(|&i| result.records[i].gc).collect();
            let f: Vec<f64> = idx.iter().map(|&i| result.records[i].value.expect("filtered")).collect();
            let n = x.len();
            for j in 0..n {
                let d = if j == 0 {
                    (f[1] - f[0]) / (x[1] - x[0])
                } else if j == n - 1 {
                    (f[n - 1] - f[n - 2]) / (x[n - 1] - x[n - 2])
                } else {
                    three_point([x[j - 1], x[j], x[j + 1]], [f[j - 1], f[j], f[j + 1]])
                };
                out[idx[j]].value = Some(d);
            }
        }
    }
    Ok(SweepResult { quantity, records: out })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{GcGrid, Range, Refinement};

    fn synthetic(gcs: Vec<f64>, f: impl Fn(f64) -> f64) -> SweepResult {
        let records = gcs
            .into_iter()
            .map(|gc| {
                let mut r = PointRecord::new(&PointTask { gc, ratio: 1e4, l: 2 }, "l=2");
                r.value = Some(f(gc));
                r
            })
            .collect();
        SweepResult { quantity: Quantity::PhiOutSs, records }
    }

    #[test]
    fn constant_series_has_zero_derivative() {
        let d = derivative_series(&synthetic(vec![0.9, 0.95, 0.99, 1.0, 1.01, 1.02], |_| 3.0)).unwrap();
        assert!(d.records.iter().all(|r| r.value == Some(0.0)));
        assert_eq!(d.quantity, Quantity::DphiOutSs);
    }

    #[test]
    fn linear_ramp_on_piecewise_grid() {
        let grid = GcGrid::Range {
            range: Range { start: 0.9, stop: 1.1, step: 0.01 },
            refine: Refinement::Window(Range { start: 0.99, stop: 1.01, step: 0.001 }),
        };
        let d = derivative_series(&synthetic(grid.points().unwrap(), |g| 2.0 * g)).unwrap();
        for r in &d.records {
            assert!((r.value.unwrap() - 2.0).abs() < 1e-9, "{r:?}");
        }
    }

    #[test]
    fn no_stencil_crosses_the_critical_point() {
        let step = |g: f64| if g < 1.0 { 1.0 } else { 0.0 };
        let d = derivative_series(&synthetic(vec![0.97, 0.98, 0.99, 1.0, 1.01, 1.02], step)).unwrap();
        assert!(d.records.iter().all(|r| r.value == Some(0.0)));
    }

    #[test]
    fn short_segment_is_an_error() {
        assert!(derivative_series(&synthetic(vec![0.9, 0.95, 0.99, 1.0, 1.01], |g| g)).is_err());
    }

    #[test]
    fn failed_rows_survive() {
        let spec = SweepSpec { gc: GcGrid::Values(vec![0.1, 0.2, 0.3, 0.4]), ..SweepSpec::default() };
        let res = run_sweep_with(&spec, |t| {
            if t.gc == 0.3 {
                vec![PointRecord::failed(t, "nbar0", "injected".into())]
            } else {
                let mut r = PointRecord::new(t, "nbar0");
                r.value = Some(t.gc);
                vec![r]
            }
        })
        .unwrap();
        assert_eq!(res.records.len(), 4);
        assert_eq!(res.failures(), 1);
        assert!(!res.records[2].status.is_ok());
        let all_bad = run_sweep_with(&spec, |t| vec![PointRecord::failed(t, "nbar0", "x".into())]);
        assert!(matches!(all_bad, Err(SweepError::AllFailed(_))));
    }
}

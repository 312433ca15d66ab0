// Copyright 2026 The rabi-qpt Authors
// SPDX-License-Identifier: Apache-2.0

//! CSV emission and the `run.meta` sidecar.

use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::SweepSpec;
use crate::error::{Result, SweepError};
use crate::eval::{PointRecord, PointTask, Status};
use crate::sweep::SweepResult;

pub const COLUMNS: [&str; 10] =
    ["g_c", "ratio", "series", "value", "value_right", "reference", "n_fock", "dressed_m", "converged", "status"];

/// Twelve significant digits in scientific notation.
pub fn format_value(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.11e}")
    } else {
        x.to_string()
    }
}

fn opt<T>(v: Option<T>, f: impl Fn(T) -> String) -> String {
    v.map(f).unwrap_or_default()
}

fn row(r: &PointRecord) -> [String; 10] {
    [
        format_value(r.gc),
        format_value(r.ratio),
        r.series.clone(),
        opt(r.value, format_value),
        opt(r.value_right, format_value),
        opt(r.reference, format_value),
        opt(r.n_fock, |n| n.to_string()),
        opt(r.dressed_m, |n| n.to_string()),
        r.converged.to_string(),
        r.status.label(),
    ]
}

fn csv_err(path: &Path) -> impl Fn(csv::Error) -> SweepError + '_ {
    move |source| SweepError::Csv { path: path.to_path_buf(), source }
}

/// Writes `result` to `path` with a header row.
pub fn emit_csv(result: &SweepResult, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err(path))?;
    w.write_record(COLUMNS).map_err(csv_err(path))?;
    for r in &result.records {
        w.write_record(row(r)).map_err(csv_err(path))?;
    }
    w.flush().map_err(|source| SweepError::Io { path: path.to_path_buf(), source })
}

/// Parses a file written by [`emit_csv`]. Wall times and notes are not
/// stored in the CSV and come back empty.
pub fn read_csv(path: &Path) -> Result<Vec<PointRecord>> {
    let mut r = csv::Reader::from_path(path).map_err(csv_err(path))?;
    let bad = |m: String| SweepError::Config(format!("{}: {m}", path.display()));
    let num = |s: &str| -> Result<Option<f64>> {
        if s.is_empty() {
            Ok(None)
        } else {
            s.parse().map(Some).map_err(|_| bad(format!("bad number `{s}`")))
        }
    };
    let count = |s: &str| -> Result<Option<usize>> {
        if s.is_empty() {
            Ok(None)
        } else {
            s.parse().map(Some).map_err(|_| bad(format!("bad count `{s}`")))
        }
    };
    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(csv_err(path))?;
        if rec.len() != COLUMNS.len() {
            return Err(bad(format!("expected {} columns, got {}", COLUMNS.len(), rec.len())));
        }
        let gc = num(&rec[0])?.ok_or_else(|| bad("missing g_c".into()))?;
        let ratio = num(&rec[1])?.ok_or_else(|| bad("missing ratio".into()))?;
        let mut p = PointRecord::new(&PointTask { gc, ratio, l: 0 }, &rec[2]);
        p.value = num(&rec[3])?;
        p.value_right = num(&rec[4])?;
        p.reference = num(&rec[5])?;
        p.n_fock = count(&rec[6])?;
        p.dressed_m = count(&rec[7])?;
        p.converged = rec[8] == *"true";
        p.status = match &rec[9] {
            "ok" => Status::Ok,
            s => Status::Failed(s.strip_prefix("failed: ").unwrap_or(s).to_string()),
        };
        out.push(p);
    }
    Ok(out)
}

#[derive(Serialize)]
struct PointMeta<'a> {
    g_c: f64,
    ratio: f64,
    series: &'a str,
    status: String,
    converged: bool,
    n_fock: Option<usize>,
    dressed_m: Option<usize>,
    note: Option<&'a str>,
    wall_time_s: f64,
}

#[derive(Serialize)]
struct RunMeta<'a> {
    tool: &'static str,
    version: &'static str,
    spec: &'a SweepSpec,
    files: Vec<String>,
    points: usize,
    failures: usize,
    all_converged: bool,
    notes: Vec<String>,
    wall_time_s: f64,
    per_point: Vec<PointMeta<'a>>,
}

/// Writes `run.meta` (JSON) into `dir`.
pub fn write_meta(
    dir: &Path,
    spec: &SweepSpec,
    results: &[&SweepResult],
    files: &[PathBuf],
    notes: Vec<String>,
    wall_time_s: f64,
) -> Result<PathBuf> {
    let primary = results.first().map(|r| r.records.as_slice()).unwrap_or(&[]);
    let meta = RunMeta {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        spec,
        files: files.iter().map(|p| p.display().to_string()).collect(),
        points: primary.len(),
        failures: primary.iter().filter(|r| !r.status.is_ok()).count(),
        all_converged: primary.iter().all(|r| r.converged),
        notes,
        wall_time_s,
        per_point: primary
            .iter()
            .map(|r| PointMeta {
                g_c: r.gc,
                ratio: r.ratio,
                series: &r.series,
                status: r.status.label(),
                converged: r.converged,
                n_fock: r.n_fock,
                dressed_m: r.dressed_m,
                note: r.note.as_deref(),
                wall_time_s: r.wall_time,
            })
            .collect(),
    };
    let path = dir.join("run.meta");
    let text = serde_json::to_string_pretty(&meta).expect("metadata serializes");
    std::fs::write(&path, text).map_err(|source| SweepError::Io { path: path.clone(), source })?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Quantity;

    #[test]
    fn empty_result_is_header_only() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.csv");
        emit_csv(&SweepResult { quantity: Quantity::Nbar0, records: vec![] }, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text.trim_end(), COLUMNS.join(","));
    }

    #[test]
    fn round_trip_preserves_values() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.csv");
        let t = PointTask { gc: 0.999, ratio: 1e4, l: 2 };
        let mut a = PointRecord::new(&t, "l=2");
        a.value = Some(std::f64::consts::PI * 1e-3);
        a.reference = Some(-1.0 / 3.0);
        a.n_fock = Some(384);
        a.dressed_m = Some(60);
        let b = PointRecord::failed(&t, "l=2", "did not converge, twice".into());
        let res = SweepResult { quantity: Quantity::PhiOutSs, records: vec![a.clone(), b.clone()] };
        emit_csv(&res, &path).unwrap();
        let back = read_csv(&path).unwrap();
        assert_eq!(back.len(), 2);
        let v = back[0].value.unwrap();
        assert!((v - a.value.unwrap()).abs() <= 1e-12 * v.abs());
        assert!((back[0].reference.unwrap() + 1.0 / 3.0).abs() <= 1e-12);
        assert_eq!(back[0].n_fock, Some(384));
        assert_eq!(back[1].status, b.status);
        assert_eq!(back[1].value, None);
    }

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(format_value(0.1), "1.00000000000e-1");
        assert_eq!(format_value(-2.5e-7), "-2.50000000000e-7");
    }

    #[test]
    fn unwritable_destination_names_path() {
        let res = SweepResult { quantity: Quantity::Nbar0, records: vec![] };
        let e = emit_csv(&res, Path::new("/nonexistent/dir/x.csv")).unwrap_err();
        assert!(e.to_string().contains("/nonexistent/dir/x.csv"));
    }
}

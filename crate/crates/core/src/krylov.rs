// Copyright 2026 The rabi-qpt Authors
// SPDX-License-Identifier: Apache-2.0

//! Restarted GMRES for matrix-free complex linear systems.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Iteration limits for [`gmres`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GmresOptions {
    /// Krylov dimension before a restart.
    pub restart: usize,
    /// Total operator applications.
    pub max_matvec: usize,
    /// Target on `‖b − Ax‖₂`.
    pub abs_tol: f64,
}

impl Default for GmresOptions {
    fn default() -> Self {
        Self { restart: 40, max_matvec: 400, abs_tol: 1e-10 }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct GmresStats {
    pub matvecs: usize,
    pub residual: f64,
}

fn dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm(a: &[C64]) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Solves `A x = b` starting from the given `x`. `apply(v, out)` writes
/// `A v` into `out`. Returns an error when the tolerance is not met within
/// `max_matvec` applications.
pub fn gmres<F>(mut apply: F, b: &[C64], x: &mut [C64], opts: &GmresOptions) -> Result<GmresStats>
where
    F: FnMut(&[C64], &mut [C64]) -> Result<()>,
{
    let n = b.len();
    if x.len() != n {
        return Err(Error::Contract(format!("gmres: x has length {}, b has {n}", x.len())));
    }
    let m = opts.restart.max(1);
    let mut stats = GmresStats::default();
    let mut r = vec![C64::new(0.0, 0.0); n];
    let mut w = vec![C64::new(0.0, 0.0); n];
    loop {
        apply(x, &mut w)?;
        stats.matvecs += 1;
        for i in 0..n {
            r[i] = b[i] - w[i];
        }
        let beta = norm(&r);
        stats.residual = beta;
        if !beta.is_finite() {
            return Err(Error::Numeric("gmres: residual is not finite".into()));
        }
        if beta <= opts.abs_tol {
            return Ok(stats);
        }
        if stats.matvecs >= opts.max_matvec {
            return Err(Error::Numeric(format!(
                "gmres: residual {beta:.3e} above {:.1e} after {} applications",
                opts.abs_tol, stats.matvecs
            )));
        }
        let mut basis: Vec<Vec<C64>> = vec![r.iter().map(|z| z / beta).collect()];
        let mut h = vec![vec![C64::new(0.0, 0.0); m]; m + 1];
        let mut cs = vec![0.0f64; m];
        let mut sn = vec![C64::new(0.0, 0.0); m];
        let mut g = vec![C64::new(0.0, 0.0); m + 1];
        g[0] = C64::new(beta, 0.0);
        let mut k_used = 0;
        for k in 0..m {
            apply(&basis[k], &mut w)?;
            stats.matvecs += 1;
            for (j, v) in basis.iter().enumerate() {
                let hj = dot(v, &w);
                h[j][k] = hj;
                for i in 0..n {
                    w[i] -= hj * v[i];
                }
            }
            let hn = norm(&w);
            h[k + 1][k] = C64::new(hn, 0.0);
            for j in 0..k {
                let t = cs[j] * h[j][k] + sn[j] * h[j + 1][k];
                h[j + 1][k] = -sn[j].conj() * h[j][k] + cs[j] * h[j + 1][k];
                h[j][k] = t;
            }
            let (a, bb) = (h[k][k], h[k + 1][k]);
            let d = (a.norm_sqr() + bb.norm_sqr()).sqrt();
            if d == 0.0 {
                cs[k] = 1.0;
                sn[k] = C64::new(0.0, 0.0);
            } else if a.norm() == 0.0 {
                cs[k] = 0.0;
                sn[k] = bb.conj() / bb.norm();
            } else {
                cs[k] = a.norm() / d;
                sn[k] = (a / a.norm()) * bb.conj() / d;
            }
            h[k][k] = cs[k] * a + sn[k] * bb;
            h[k + 1][k] = C64::new(0.0, 0.0);
            g[k + 1] = -sn[k].conj() * g[k];
            g[k] *= cs[k];
            k_used = k + 1;
            let res = g[k + 1].norm();
            stats.residual = res;
            if res <= opts.abs_tol || hn <= 1e-14 * beta || stats.matvecs >= opts.max_matvec {
                break;
            }
            basis.push(w.iter().map(|z| z / hn).collect());
        }
        let mut y = vec![C64::new(0.0, 0.0); k_used];
        for i in (0..k_used).rev() {
            let mut s = g[i];
            for j in i + 1..k_used {
                s -= h[i][j] * y[j];
            }
            if h[i][i].norm() == 0.0 {
                return Err(Error::Numeric("gmres: singular Hessenberg system".into()));
            }
            y[i] = s / h[i][i];
        }
        for (j, yj) in y.iter().enumerate() {
            for i in 0..n {
                x[i] += yj * basis[j][i];
            }
        }
    }
}

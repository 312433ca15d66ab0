// Copyright 2026 The rabi-qpt Authors
// SPDX-License-Identifier: Apache-2.0

//! Hermitian eigensystems, matrix exponentials and a symmetric tridiagonal
//! eigensolver for the lowest part of long chains.

use ndarray::{s, Array1, Array2, ArrayView1};
use ndarray_linalg::{Eigh, Inverse, UPLO};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::operator::Operator;

/// Phase convention applied to every eigenvector returned by this crate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PhaseConvention {
    /// The largest-magnitude component (first one on ties) is real and positive.
    LargestComponentPositive,
}

/// Ascending eigenvalues with orthonormal, phase-fixed eigenvectors stored
/// as columns.
#[derive(Clone, Debug)]
pub struct EigenSystem {
    pub values: Array1<f64>,
    pub vectors: Array2<C64>,
    pub phase: PhaseConvention,
}

impl EigenSystem {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn vector(&self, j: usize) -> ArrayView1<'_, C64> {
        self.vectors.column(j)
    }

    /// `max_j ‖H v_j − λ_j v_j‖`.
    pub fn max_residual(&self, h: &Operator) -> f64 {
        let hv = h.matrix().dot(&self.vectors);
        (0..self.len())
            .map(|j| {
                let lam = self.values[j];
                hv.column(j)
                    .iter()
                    .zip(self.vectors.column(j).iter())
                    .map(|(a, b)| (a - b * lam).norm_sqr())
                    .sum::<f64>()
                    .sqrt()
            })
            .fold(0.0, f64::max)
    }
}

/// Rotates `v` so that its largest-magnitude entry is real and positive.
pub fn fix_phase(v: &mut [C64]) {
    let mut best = 0usize;
    let mut best_abs = -1.0;
    for (i, z) in v.iter().enumerate() {
        let a = z.norm();
        if a > best_abs {
            best_abs = a;
            best = i;
        }
    }
    if best_abs > 0.0 {
        let rot = v[best].conj() / best_abs;
        v.iter_mut().for_each(|z| *z *= rot);
    }
}

/// Real-vector analogue of [`fix_phase`].
pub fn fix_sign(v: &mut [f64]) {
    let mut best = 0usize;
    let mut best_abs = -1.0;
    for (i, x) in v.iter().enumerate() {
        if x.abs() > best_abs {
            best_abs = x.abs();
            best = i;
        }
    }
    if v.get(best).is_some_and(|x| *x < 0.0) {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

/// Full eigendecomposition of a Hermitian operator.
pub fn herm_eig(h: &Operator) -> Result<EigenSystem> {
    if !h.is_finite() {
        return Err(Error::Numeric("non-finite entries in eigenproblem".into()));
    }
    if !h.is_hermitian() {
        return Err(Error::Contract(format!(
            "herm_eig needs a Hermitian operator (defect {:.3e}, scale {:.3e})",
            h.hermiticity_defect(),
            h.max_abs()
        )));
    }
    // LAPACK reads the row-major buffer as the transpose, i.e. conj(H); the
    // returned vectors are conjugated back.
    let (vals, vecs) = h.matrix().eigh(UPLO::Lower)?;
    let vecs = vecs.mapv(|z| z.conj());
    let mut order: Vec<usize> = (0..vals.len()).collect();
    order.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
    let n = vals.len();
    let mut values = Array1::zeros(n);
    let mut vectors = Array2::zeros((n, n));
    for (dst, &src) in order.iter().enumerate() {
        values[dst] = vals[src];
        let mut col: Vec<C64> = vecs.column(src).to_vec();
        fix_phase(&mut col);
        vectors.column_mut(dst).assign(&Array1::from(col));
    }
    Ok(EigenSystem { values, vectors, phase: PhaseConvention::LargestComponentPositive })
}

fn one_norm(a: &Array2<C64>) -> f64 {
    (0..a.ncols())
        .map(|j| a.column(j).iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Matrix exponential by scaling and squaring with a degree-13 Padé
/// approximant.
pub fn mat_exp(a: &Operator) -> Result<Operator> {
    const B: [f64; 14] = [
        64764752532480000.0,
        32382376266240000.0,
        7771770303897600.0,
        1187353796428800.0,
        129060195264000.0,
        10559470521600.0,
        670442572800.0,
        33522128640.0,
        1323241920.0,
        40840800.0,
        960960.0,
        16380.0,
        182.0,
        1.0,
    ];
    const THETA_13: f64 = 5.371920351148152;

    if !a.is_finite() {
        return Err(Error::Numeric("matrix exponential of non-finite matrix".into()));
    }
    let n = a.dim();
    let norm = one_norm(a.matrix());
    if norm == 0.0 {
        return Ok(Operator::identity(n));
    }
    let squarings = if norm > THETA_13 { (norm / THETA_13).log2().ceil() as i32 } else { 0 };
    let scaled = a.matrix() / C64::new(2f64.powi(squarings), 0.0);

    let id: Array2<C64> = Array2::eye(n);
    let a2 = scaled.dot(&scaled);
    let a4 = a2.dot(&a2);
    let a6 = a4.dot(&a2);
    let c = |x: f64| C64::new(x, 0.0);

    let inner_u = &a6 * c(B[13]) + &a4 * c(B[11]) + &a2 * c(B[9]);
    let u_poly = a6.dot(&inner_u) + &a6 * c(B[7]) + &a4 * c(B[5]) + &a2 * c(B[3]) + &id * c(B[1]);
    let u = scaled.dot(&u_poly);
    let inner_v = &a6 * c(B[12]) + &a4 * c(B[10]) + &a2 * c(B[8]);
    let v = a6.dot(&inner_v) + &a6 * c(B[6]) + &a4 * c(B[4]) + &a2 * c(B[2]) + &id * c(B[0]);

    let denom = (&v - &u).inv()?;
    let mut r = denom.dot(&(&v + &u));
    for _ in 0..squarings {
        r = r.dot(&r);
    }
    let out = Operator::from_matrix(r)?;
    if !out.is_finite() {
        return Err(Error::Numeric("matrix exponential overflowed".into()));
    }
    Ok(out)
}

/// Real symmetric tridiagonal matrix.
#[derive(Clone, Debug)]
pub struct SymTridiagonal {
    diag: Vec<f64>,
    off: Vec<f64>,
}

impl SymTridiagonal {
    pub fn new(diag: Vec<f64>, off: Vec<f64>) -> Result<Self> {
        if diag.is_empty() || off.len() + 1 != diag.len() {
            return Err(Error::Config(format!(
                "tridiagonal shape mismatch: {} diagonal, {} off-diagonal",
                diag.len(),
                off.len()
            )));
        }
        if diag.iter().chain(off.iter()).any(|x| !x.is_finite()) {
            return Err(Error::Numeric("non-finite tridiagonal entries".into()));
        }
        Ok(Self { diag, off })
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    pub fn off(&self) -> &[f64] {
        &self.off
    }

    fn gershgorin(&self) -> (f64, f64) {
        let n = self.len();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let left = if i > 0 { self.off[i - 1].abs() } else { 0.0 };
            let right = if i + 1 < n { self.off[i].abs() } else { 0.0 };
            lo = lo.min(self.diag[i] - left - right);
            hi = hi.max(self.diag[i] + left + right);
        }
        (lo, hi)
    }

    pub fn norm_bound(&self) -> f64 {
        let (lo, hi) = self.gershgorin();
        lo.abs().max(hi.abs())
    }

    /// Number of eigenvalues strictly below `x`.
    fn count_below(&self, x: f64, pivmin: f64) -> usize {
        let mut count = 0;
        let mut q = self.diag[0] - x;
        if q.abs() < pivmin {
            q = -pivmin;
        }
        if q < 0.0 {
            count += 1;
        }
        for i in 1..self.len() {
            let e = self.off[i - 1];
            q = self.diag[i] - x - e * e / q;
            if q.abs() < pivmin {
                q = -pivmin;
            }
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    /// The `k` smallest eigenvalues, ascending, by Sturm bisection.
    pub fn lowest_values(&self, k: usize) -> Vec<f64> {
        let k = k.min(self.len());
        let (glo, ghi) = self.gershgorin();
        let norm = glo.abs().max(ghi.abs()).max(f64::MIN_POSITIVE);
        let max_e2 = self.off.iter().map(|e| e * e).fold(0.0, f64::max);
        let pivmin = (f64::MIN_POSITIVE * max_e2.max(1.0)).max(f64::MIN_POSITIVE);
        let tol = 2.0 * f64::EPSILON * norm;
        let mut out = Vec::with_capacity(k);
        let mut lower = glo - tol;
        for i in 0..k {
            let mut lo = lower;
            let mut hi = ghi + tol;
            while hi - lo > tol.max(4.0 * f64::EPSILON * lo.abs().max(hi.abs())) {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                if self.count_below(mid, pivmin) > i {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            let lam = 0.5 * (lo + hi);
            out.push(lam);
            lower = lo;
        }
        out
    }

    fn apply(&self, v: &[f64], out: &mut [f64]) {
        let n = self.len();
        for i in 0..n {
            let mut acc = self.diag[i] * v[i];
            if i > 0 {
                acc += self.off[i - 1] * v[i - 1];
            }
            if i + 1 < n {
                acc += self.off[i] * v[i + 1];
            }
            out[i] = acc;
        }
    }

    /// Solves `(T − shift) x = b` in place with partial pivoting.
    fn shifted_solve(&self, shift: f64, b: &mut [f64], floor: f64) {
        let n = self.len();
        if n == 1 {
            let d = self.diag[0] - shift;
            b[0] /= if d.abs() < floor { floor } else { d };
            return;
        }
        // LU of the shifted matrix: rows hold (d, u1, u2) after pivoting.
        let mut d: Vec<f64> = self.diag.iter().map(|x| x - shift).collect();
        let mut du: Vec<f64> = self.off.clone();
        let mut dl: Vec<f64> = self.off.clone();
        let mut du2 = vec![0.0; n.saturating_sub(2)];
        let mut swapped = vec![false; n - 1];
        for i in 0..n - 1 {
            if d[i].abs() >= dl[i].abs() {
                if d[i].abs() < floor {
                    d[i] = floor;
                }
                let fact = dl[i] / d[i];
                dl[i] = fact;
                d[i + 1] -= fact * du[i];
            } else {
                let fact = d[i] / dl[i];
                d[i] = dl[i];
                dl[i] = fact;
                let temp = du[i];
                du[i] = d[i + 1];
                d[i + 1] = temp - fact * d[i + 1];
                if i + 1 < n - 1 {
                    du2[i] = du[i + 1];
                    du[i + 1] = -fact * du[i + 1];
                }
                swapped[i] = true;
            }
        }
        if d[n - 1].abs() < floor {
            d[n - 1] = floor;
        }
        for i in 0..n - 1 {
            if swapped[i] {
                b.swap(i, i + 1);
            }
            b[i + 1] -= dl[i] * b[i];
        }
        b[n - 1] /= d[n - 1];
        if n >= 2 {
            b[n - 2] = (b[n - 2] - du[n - 2] * b[n - 1]) / d[n - 2];
        }
        for i in (0..n.saturating_sub(2)).rev() {
            b[i] = (b[i] - du[i] * b[i + 1] - du2[i] * b[i + 2]) / d[i];
        }
    }

    /// The `k` lowest eigenpairs. Vectors are unit-norm with the largest
    /// component positive; eigenvalues are Rayleigh quotients of the vectors.
    pub fn lowest_pairs(&self, k: usize) -> (Vec<f64>, Vec<Vec<f64>>) {
        let n = self.len();
        let guesses = self.lowest_values(k);
        let norm = self.norm_bound().max(f64::MIN_POSITIVE);
        let floor = f64::EPSILON * norm;
        let mut values = Vec::with_capacity(guesses.len());
        let mut vectors: Vec<Vec<f64>> = Vec::with_capacity(guesses.len());
        let mut seed: u64 = 0x9E37_79B9_7F4A_7C15;
        let mut tv = vec![0.0; n];
        for &lam in &guesses {
            let mut x: Vec<f64> = (0..n)
                .map(|_| {
                    seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                    0.5 + ((seed >> 11) as f64) / ((1u64 << 53) as f64)
                })
                .collect();
            for _ in 0..4 {
                orthogonalize(&mut x, &vectors);
                normalize(&mut x);
                self.shifted_solve(lam, &mut x, floor);
                orthogonalize(&mut x, &vectors);
                if !normalize(&mut x) {
                    break;
                }
            }
            fix_sign(&mut x);
            self.apply(&x, &mut tv);
            let rq: f64 = x.iter().zip(&tv).map(|(a, b)| a * b).sum();
            values.push(rq);
            vectors.push(x);
        }
        (values, vectors)
    }

    /// Dense copy, for cross-checks on small chains.
    pub fn to_dense(&self) -> Array2<f64> {
        let n = self.len();
        let mut m = Array2::zeros((n, n));
        m.diag_mut().assign(&Array1::from(self.diag.clone()));
        for i in 0..n - 1 {
            m[[i, i + 1]] = self.off[i];
            m[[i + 1, i]] = self.off[i];
        }
        m
    }

    /// `‖T v − λ v‖₂`.
    pub fn residual(&self, lam: f64, v: &[f64]) -> f64 {
        let mut tv = vec![0.0; v.len()];
        self.apply(v, &mut tv);
        tv.iter().zip(v).map(|(a, b)| (a - lam * b).powi(2)).sum::<f64>().sqrt()
    }

    /// Leading principal submatrix of size `m`.
    pub fn leading(&self, m: usize) -> Result<Self> {
        let m = m.min(self.len());
        Self::new(self.diag[..m].to_vec(), self.off[..m.saturating_sub(1)].to_vec())
    }
}

fn orthogonalize(x: &mut [f64], basis: &[Vec<f64>]) {
    for q in basis {
        let dot: f64 = x.iter().zip(q).map(|(a, b)| a * b).sum();
        x.iter_mut().zip(q).for_each(|(a, b)| *a -= dot * b);
    }
}

fn normalize(x: &mut [f64]) -> bool {
    let nrm = x.iter().map(|a| a * a).sum::<f64>().sqrt();
    if nrm == 0.0 || !nrm.is_finite() {
        return false;
    }
    x.iter_mut().for_each(|a| *a /= nrm);
    true
}

/// Embeds a real column into a complex array.
pub fn complexify(v: &[f64]) -> Array1<C64> {
    v.iter().map(|&x| C64::new(x, 0.0)).collect()
}

/// Real parts of a slice of a complex array; errors when any imaginary part
/// exceeds `tol`.
pub fn real_part(v: ArrayView1<'_, C64>, tol: f64) -> Result<Vec<f64>> {
    let worst = v.iter().fold(0.0f64, |m, z| m.max(z.im.abs()));
    if worst > tol {
        return Err(Error::Numeric(format!("expected a real vector, imaginary part {worst:.3e}")));
    }
    Ok(v.slice(s![..]).iter().map(|z| z.re).collect())
}

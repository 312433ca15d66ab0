// Copyright 2026 The rabi-qpt Authors
// SPDX-License-Identifier: Apache-2.0

//! Adaptive Dormand–Prince 5(4) integrator for complex state vectors.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Step-size control settings.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    /// First trial step; estimated from the right-hand side when `None`.
    pub h_init: Option<f64>,
    pub h_max: f64,
    pub max_steps: usize,
}

impl OdeOptions {
    pub fn coherent() -> Self {
        Self { rtol: 1e-8, atol: 1e-10, h_init: None, h_max: f64::INFINITY, max_steps: 50_000_000 }
    }

    pub fn dissipative() -> Self {
        Self { rtol: 1e-6, atol: 1e-9, h_init: None, h_max: f64::INFINITY, max_steps: 50_000_000 }
    }
}

/// Work counters.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct OdeStats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// Reusable integrator state. The last accepted step size carries over
/// between calls to [`Dopri5::advance`].
#[derive(Clone, Debug)]
pub struct Dopri5 {
    opts: OdeOptions,
    h: Option<f64>,
    k: [Vec<C64>; 7],
    tmp: Vec<C64>,
    ynew: Vec<C64>,
    fsal_valid: bool,
    pub stats: OdeStats,
}

impl Dopri5 {
    pub fn new(dim: usize, opts: OdeOptions) -> Self {
        let z = || vec![C64::new(0.0, 0.0); dim];
        Self {
            opts,
            h: opts.h_init,
            k: [z(), z(), z(), z(), z(), z(), z()],
            tmp: z(),
            ynew: z(),
            fsal_valid: false,
            stats: OdeStats::default(),
        }
    }

    fn scaled_norm(&self, a: &[C64], ref1: &[C64], ref2: &[C64]) -> f64 {
        let n = a.len().max(1) as f64;
        let s: f64 = a
            .iter()
            .zip(ref1.iter().zip(ref2))
            .map(|(e, (y0, y1))| {
                let sc = self.opts.atol + self.opts.rtol * y0.norm().max(y1.norm());
                (e.norm() / sc).powi(2)
            })
            .sum();
        (s / n).sqrt()
    }

    fn initial_step<F>(&mut self, f: &mut F, t: f64, y: &[C64], span: f64) -> f64
    where
        F: FnMut(f64, &[C64], &mut [C64]),
    {
        let zeros = vec![C64::new(0.0, 0.0); y.len()];
        let d0 = self.scaled_norm(y, y, &zeros);
        let d1 = self.scaled_norm(&self.k[0], y, &zeros);
        let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
        let h0 = h0.min(span).min(self.opts.h_max);
        for (t_i, (yi, ki)) in self.tmp.iter_mut().zip(y.iter().zip(&self.k[0])) {
            *t_i = yi + ki * h0;
        }
        let mut f1 = zeros.clone();
        f(t + h0, &self.tmp, &mut f1);
        self.stats.evaluations += 1;
        let diff: Vec<C64> = f1.iter().zip(&self.k[0]).map(|(a, b)| (a - b) / h0).collect();
        let d2 = self.scaled_norm(&diff, y, &zeros);
        let h1 = if d1.max(d2) <= 1e-15 { (h0 * 1e-3).max(1e-6) } else { (0.01 / d1.max(d2)).powf(0.2) };
        (100.0 * h0).min(h1).min(span).min(self.opts.h_max)
    }

    /// Integrates `y' = f(t, y)` from `t0` to `t1 > t0`, overwriting `y`.
    pub fn advance<F>(&mut self, f: &mut F, t0: f64, t1: f64, y: &mut [C64]) -> Result<()>
    where
        F: FnMut(f64, &[C64], &mut [C64]),
    {
        if t1 < t0 {
            return Err(Error::Integration { t: t0, reason: format!("cannot integrate backwards to {t1}") });
        }
        if t1 == t0 {
            return Ok(());
        }
        if !self.fsal_valid {
            f(t0, y, &mut self.k[0]);
            self.stats.evaluations += 1;
        }
        let mut h = match self.h {
            Some(h) => h,
            None => self.initial_step(f, t0, y, t1 - t0),
        };
        let mut t = t0;
        let mut steps = 0usize;
        let n = y.len();
        while t < t1 {
            if steps >= self.opts.max_steps {
                self.fsal_valid = false;
                return Err(Error::Integration { t, reason: format!("exceeded {} steps", self.opts.max_steps) });
            }
            steps += 1;
            let h_min = 1e-14 * t.abs().max(1.0);
            if h < h_min {
                self.fsal_valid = false;
                return Err(Error::Integration { t, reason: format!("step size collapsed to {h:.3e}") });
            }
            let last = t + h >= t1;
            let hs = if last { t1 - t } else { h };

            macro_rules! stage {
                ($dst:expr, $c:expr, [$(($a:expr, $i:expr)),*]) => {{
                    for j in 0..n {
                        let mut acc = y[j];
                        $( acc += self.k[$i][j] * (hs * $a); )*
                        self.tmp[j] = acc;
                    }
                    f(t + $c * hs, &self.tmp, &mut self.k[$dst]);
                }};
            }
            stage!(1, C2, [(A21, 0)]);
            stage!(2, C3, [(A31, 0), (A32, 1)]);
            stage!(3, C4, [(A41, 0), (A42, 1), (A43, 2)]);
            stage!(4, C5, [(A51, 0), (A52, 1), (A53, 2), (A54, 3)]);
            stage!(5, 1.0, [(A61, 0), (A62, 1), (A63, 2), (A64, 3), (A65, 4)]);
            for j in 0..n {
                self.ynew[j] = y[j]
                    + (self.k[0][j] * A71
                        + self.k[2][j] * A73
                        + self.k[3][j] * A74
                        + self.k[4][j] * A75
                        + self.k[5][j] * A76)
                        * hs;
            }
            f(t + hs, &self.ynew, &mut self.k[6]);
            self.stats.evaluations += 6;

            for j in 0..n {
                self.tmp[j] = (self.k[0][j] * E1
                    + self.k[2][j] * E3
                    + self.k[3][j] * E4
                    + self.k[4][j] * E5
                    + self.k[5][j] * E6
                    + self.k[6][j] * E7)
                    * hs;
            }
            let err = self.scaled_norm(&self.tmp, y, &self.ynew);
            if !err.is_finite() {
                self.fsal_valid = false;
                return Err(Error::Integration { t, reason: "non-finite error estimate".into() });
            }
            let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            if err <= 1.0 {
                y.copy_from_slice(&self.ynew);
                self.k.swap(0, 6);
                t = if last { t1 } else { t + hs };
                self.stats.accepted += 1;
                // Keep the natural step when the last one was clipped.
                h = if last { h.max(hs * factor) } else { hs * factor }.min(self.opts.h_max);
            } else {
                self.stats.rejected += 1;
                h = hs * factor.min(1.0);
            }
        }
        self.h = Some(h);
        self.fsal_valid = true;
        Ok(())
    }

    /// Forgets the cached derivative; call after modifying `y` externally.
    pub fn reset(&mut self) {
        self.fsal_valid = false;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn exponential_decay_and_rotation() {
        let mut f = |_t: f64, y: &[C64], dy: &mut [C64]| {
            dy[0] = -y[0];
            dy[1] = C64::new(0.0, -3.0) * y[1];
        };
        let mut y = vec![C64::new(1.0, 0.0), C64::new(1.0, 0.0)];
        let mut ode = Dopri5::new(2, OdeOptions::coherent());
        ode.advance(&mut f, 0.0, 2.0, &mut y).unwrap();
        assert_abs_diff_eq!(y[0].re, (-2.0f64).exp(), epsilon = 1e-8);
        let want = C64::new(0.0, -6.0).exp();
        assert!((y[1] - want).norm() < 1e-7);
        // continue across several grid points
        for k in 3..=10 {
            ode.advance(&mut f, (k - 1) as f64, k as f64, &mut y).unwrap();
        }
        assert!((y[1] - C64::new(0.0, -30.0).exp()).norm() < 1e-6);
    }

    #[test]
    fn time_dependent_forcing() {
        // y' = cos t  →  y = sin t
        let mut f = |t: f64, _y: &[C64], dy: &mut [C64]| dy[0] = C64::new(t.cos(), 0.0);
        let mut y = vec![C64::new(0.0, 0.0)];
        let mut ode = Dopri5::new(1, OdeOptions::coherent());
        ode.advance(&mut f, 0.0, 10.0, &mut y).unwrap();
        assert_abs_diff_eq!(y[0].re, 10f64.sin(), epsilon = 1e-8);
    }

    #[test]
    fn step_limit_is_reported() {
        let mut f = |_t: f64, y: &[C64], dy: &mut [C64]| dy[0] = C64::new(0.0, -1e4) * y[0];
        let mut y = vec![C64::new(1.0, 0.0)];
        let opts = OdeOptions { max_steps: 10, ..OdeOptions::coherent() };
        let mut ode = Dopri5::new(1, opts);
        assert!(matches!(ode.advance(&mut f, 0.0, 100.0, &mut y), Err(Error::Integration { .. })));
    }

    #[test]
    fn rejects_backwards() {
        let mut f = |_t: f64, _y: &[C64], dy: &mut [C64]| dy[0] = C64::new(0.0, 0.0);
        let mut y = vec![C64::new(1.0, 0.0)];
        let mut ode = Dopri5::new(1, OdeOptions::coherent());
        assert!(ode.advance(&mut f, 1.0, 0.0, &mut y).is_err());
    }
}

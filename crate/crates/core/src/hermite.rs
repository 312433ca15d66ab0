// Copyright 2026 The rabi-qpt Authors
// SPDX-License-Identifier: Apache-2.0

//! Physicists' Hermite polynomials.

use crate::error::{Error, Result};

/// Largest supported degree.
pub const MAX_DEGREE: usize = 200;

/// `H_n(x)` as `sign · exp(log_abs)`. A zero value has `sign == 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LogValue {
    pub log_abs: f64,
    pub sign: f64,
}

impl LogValue {
    pub fn value(&self) -> f64 {
        if self.sign == 0.0 {
            0.0
        } else {
            self.sign * self.log_abs.exp()
        }
    }
}

fn check_degree(n: usize) -> Result<()> {
    if n > MAX_DEGREE {
        return Err(Error::Domain(format!("Hermite degree {n} exceeds {MAX_DEGREE}")));
    }
    Ok(())
}

/// `H_n(x)` via `H_{k+1} = 2x H_k − 2k H_{k−1}`. Fails when the value is not
/// representable as an `f64`.
pub fn hermite(n: usize, x: f64) -> Result<f64> {
    check_degree(n)?;
    if !x.is_finite() {
        return Err(Error::Numeric(format!("Hermite argument {x}")));
    }
    let mut prev = 1.0;
    if n == 0 {
        return Ok(prev);
    }
    let mut cur = 2.0 * x;
    for k in 1..n {
        let next = 2.0 * x * cur - 2.0 * k as f64 * prev;
        prev = cur;
        cur = next;
    }
    if !cur.is_finite() {
        return Err(Error::Numeric(format!("H_{n}({x}) overflows; use hermite_log")));
    }
    Ok(cur)
}

/// `H_n(x)` in log-magnitude form. The recurrence is rescaled whenever the
/// running values grow large, so no intermediate overflows.
pub fn hermite_log(n: usize, x: f64) -> Result<LogValue> {
    check_degree(n)?;
    if !x.is_finite() {
        return Err(Error::Numeric(format!("Hermite argument {x}")));
    }
    let mut log_scale = 0.0;
    let mut prev = 1.0f64;
    let mut cur = if n == 0 { 1.0 } else { 2.0 * x };
    for k in 1..n {
        let next = 2.0 * x * cur - 2.0 * k as f64 * prev;
        prev = cur;
        cur = next;
        let big = cur.abs().max(prev.abs());
        if big > 1e150 {
            prev /= big;
            cur /= big;
            log_scale += big.ln();
        }
    }
    if cur == 0.0 {
        return Ok(LogValue { log_abs: f64::NEG_INFINITY, sign: 0.0 });
    }
    Ok(LogValue { log_abs: log_scale + cur.abs().ln(), sign: cur.signum() })
}

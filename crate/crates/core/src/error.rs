// Copyright 2026 The rabi-qpt Authors
// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

/// Failures surfaced by the numerical core.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("unknown operator label `{0}`")]
    Lookup(String),

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("numeric error: {0}")]
    Numeric(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("truncation error: {0}")]
    Truncation(String),

    #[error("integration error at t = {t}: {reason}")]
    Integration { t: f64, reason: String },

    #[error("steady state not reached after t = {t_final}: {reason} (last Φ_out samples: {last_phi:?})")]
    SteadyState {
        t_final: f64,
        reason: String,
        last_phi: Vec<f64>,
    },

    #[error("linear algebra failure: {0}")]
    Linalg(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<ndarray_linalg::error::LinalgError> for Error {
    fn from(e: ndarray_linalg::error::LinalgError) -> Self {
        Error::Linalg(e.to_string())
    }
}

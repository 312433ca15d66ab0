// Copyright 2026 The rabi-qpt Authors
// SPDX-License-Identifier: Apache-2.0

use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum SweepError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("CSV error on {path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    #[error(transparent)]
    Core(#[from] rabi_core::Error),

    #[error("every sweep point failed; first failure: {0}")]
    AllFailed(String),
}

impl SweepError {
    /// Process exit code: 2 for configuration problems, 3 for numerical
    /// failures, 1 for I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            SweepError::Config(_) => 2,
            SweepError::Core(rabi_core::Error::Config(_)) => 2,
            SweepError::Io { .. } | SweepError::Csv { .. } => 1,
            _ => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, SweepError>;

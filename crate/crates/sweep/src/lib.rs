// Copyright 2026 The rabi-qpt Authors
// SPDX-License-Identifier: Apache-2.0

//! Parameter sweeps over `g_c` and `Ω/ω`, figure presets, CSV output and
//! the `rabi-qpt` command line.

pub mod cli;
pub mod config;
pub mod error;
pub mod eval;
pub mod grid;
pub mod output;
pub mod sweep;
pub mod validate;

pub use config::{parse_config, preset, Quantity, SweepSpec};
pub use error::{Result, SweepError};
pub use sweep::{derivative_series, run_sweep, run_sweep_with, SweepResult};

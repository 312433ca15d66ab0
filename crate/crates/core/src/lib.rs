// Copyright 2026 The rabi-qpt Authors
// SPDX-License-Identifier: Apache-2.0

//! Numerical core for critical phenomena of the three-level quantum Rabi
//! model: operators, spectra, closed-form effective theory and dressed-basis
//! open-system dynamics.
//!
//! Energies and times are in units of the cavity frequency `ω`.

pub mod analytics;
pub mod coherent;
pub mod dressed;
pub mod error;
pub mod hermite;
pub mod krylov;
pub mod linalg;
pub mod master;
pub mod ode;
pub mod operator;
pub mod rabi;
pub mod scenario;

pub use error::{Error, Result};
pub use linalg::{herm_eig, mat_exp, EigenSystem};
pub use operator::{HilbertConfig, Level, Operator};
pub use rabi::{DriveSpec, ModelParams};

// Copyright 2026 The rabi-qpt Authors
// SPDX-License-Identifier: Apache-2.0

//! Assembly of a resonantly driven Raman setup from `(g_c, Ω/ω, l)`.

use crate::analytics::RamanTriple;
use crate::dressed::{DressedSubspace, StateTag};
use crate::error::{Error, Result};
use crate::rabi::{default_n_fock, DriveSpec, ModelParams, Parity, RabiSpectrum};

/// Inputs of a driven setup.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScenarioSpec {
    pub gc: f64,
    pub ratio: f64,
    pub l: u32,
    /// Detuning index of `ω_μ`; `max(l + 2, 2l)` when `None`, which keeps
    /// `|E₀⟩` above `|μ_2l⟩`.
    pub n_d: Option<u32>,
    /// `Ω_p / (E₂ − E₀)`.
    pub pump_fraction: f64,
    /// `Ω_s / Ω_p`.
    pub stokes_ratio: f64,
    /// Fock truncation; [`default_n_fock`] plus `2M` when `None`.
    pub n_fock: Option<usize>,
    /// Dressed-subspace size.
    pub m: usize,
}

impl ScenarioSpec {
    pub fn n_d(&self) -> u32 {
        self.n_d.unwrap_or((self.l + 2).max(2 * self.l))
    }
}

/// A fully resolved driven setup.
#[derive(Clone, Debug)]
pub struct Scenario {
    pub spec: ScenarioSpec,
    /// Model parameters including `ω_μ`.
    pub params: ModelParams,
    pub n_fock: usize,
    pub e0: f64,
    pub e2: f64,
    pub omega_mu: f64,
    pub drive: DriveSpec,
    pub subspace: DressedSubspace,
    pub triple: RamanTriple,
}

impl Scenario {
    pub fn build(spec: ScenarioSpec) -> Result<Self> {
        if spec.l == 0 {
            return Err(Error::Config("Raman order l must be at least 1".into()));
        }
        if spec.m < 2 * spec.l as usize + 1 {
            return Err(Error::Config(format!("M = {} cannot hold |μ_{}⟩", spec.m, 2 * spec.l)));
        }
        let base = ModelParams::from_gc(spec.gc, spec.ratio)?;
        let n_fock = spec.n_fock.unwrap_or_else(|| default_n_fock(&base) + 2 * spec.m);
        let per_parity = spec.m.max(2);
        let spectrum = RabiSpectrum::compute(&base, n_fock, per_parity)?;
        let mut even = spectrum.states().iter().filter(|s| s.parity == Parity::Even);
        let ground = even.next().ok_or_else(|| Error::Numeric("empty even chain".into()))?.clone();
        let e2 = even.next().ok_or_else(|| Error::Numeric("even chain has a single state".into()))?.energy;
        let e0 = ground.energy;
        let (drive, omega_mu) =
            DriveSpec::resonant(e0, e2, spec.l, spec.n_d(), spec.pump_fraction, spec.stokes_ratio)?;
        let params = base.with_omega_mu(omega_mu)?;
        let spectrum = RabiSpectrum::compute(&params, n_fock, per_parity)?;
        let subspace = DressedSubspace::from_spectrum(&spectrum, spec.m)?;
        subspace.require(&[StateTag::Mu(0), StateTag::Mu(2 * spec.l as usize)])?;
        let triple = RamanTriple::from_ground(&ground, &drive);
        Ok(Self { spec, params, n_fock, e0, e2, omega_mu, drive, subspace, triple })
    }

    /// Index of `|μ₀⟩` in the subspace.
    pub fn mu0(&self) -> usize {
        self.subspace.index_of(StateTag::Mu(0)).expect("checked at build")
    }
}

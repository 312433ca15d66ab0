// Copyright 2026 The rabi-qpt Authors
// SPDX-License-Identifier: Apache-2.0

//! JSON configuration, figure presets and the resolved [`SweepSpec`].
//!
//! Resolution order, later entries winning: built-in defaults, the named
//! preset, the configuration blocks, command-line overrides.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Result, SweepError};
use crate::grid::{GcGrid, Range, Refinement};

/// Quantity evaluated at every grid point.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum Quantity {
    /// Ground-state photon number `n̄₀`.
    Nbar0,
    /// `dn̄₀/dg_c` by finite differences at each point.
    Dnbar0,
    /// Ground-state amplitudes `|c_2k|`.
    C2k,
    /// Maximum of `⟨X⁻X⁺⟩` in the driven coherent evolution.
    Nmax,
    /// Effective-Hamiltonian prediction of `n̄_max`.
    NmaxE,
    /// Steady-state output photon rate.
    PhiOutSs,
    /// `dΦ_out^ss/dg_c` from the `phi_out_ss` series.
    DphiOutSs,
}

impl Quantity {
    pub fn name(&self) -> &'static str {
        match self {
            Quantity::Nbar0 => "nbar0",
            Quantity::Dnbar0 => "dnbar0",
            Quantity::C2k => "c2k",
            Quantity::Nmax => "nmax",
            Quantity::NmaxE => "nmax_e",
            Quantity::PhiOutSs => "phi_out_ss",
            Quantity::DphiOutSs => "dphi_out_ss",
        }
    }

    /// Whether the quantity needs the driven Raman setup.
    pub fn is_driven(&self) -> bool {
        matches!(self, Quantity::Nmax | Quantity::NmaxE | Quantity::PhiOutSs | Quantity::DphiOutSs)
    }
}

/// Steady-state solver selection.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SteadyMethodName {
    Shooting,
    Integration,
    RotatingFrame,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Dissipation {
    pub kappa: f64,
    pub gamma1: f64,
    pub gamma2: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Numerics {
    /// Fixed Fock truncation; automatic when `None`.
    pub n_fock: Option<usize>,
    /// Run the `n → n + 32` truncation check for ground-state observables.
    pub truncation_check: bool,
    /// Dressed-subspace size `M`.
    pub dressed_m: usize,
    /// Largest `k` for `c2k`.
    pub k_max: usize,
    /// Finite-difference step for `dnbar0`; automatic when `None`.
    pub delta: Option<f64>,
    pub steady_method: SteadyMethodName,
    /// Levels used for a rotating-frame initial state; `|μ₀⟩` when `None`.
    pub seed_m: Option<usize>,
    pub ss_max_time: f64,
    pub ss_rel_tol: f64,
    /// Repeat steady states at `2M` and flag disagreement above 1%.
    pub m_doubling_check: bool,
}

impl Default for Numerics {
    fn default() -> Self {
        Self {
            n_fock: None,
            truncation_check: true,
            dressed_m: 60,
            k_max: 4,
            delta: None,
            steady_method: SteadyMethodName::Shooting,
            seed_m: None,
            ss_max_time: 1e5,
            ss_rel_tol: 1e-3,
            m_doubling_check: false,
        }
    }
}

/// Fully resolved sweep description.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub preset: Option<String>,
    pub quantity: Quantity,
    pub gc: GcGrid,
    pub ratios: Vec<f64>,
    pub ls: Vec<u32>,
    /// Detuning index; `max(l + 2, 2l)` per `l` when `None`.
    pub n_d: Option<u32>,
    pub pump_fraction: f64,
    pub stokes_ratio: f64,
    pub time_cap: f64,
    pub dissipation: Dissipation,
    pub numerics: Numerics,
    pub jobs: usize,
}

impl Default for SweepSpec {
    fn default() -> Self {
        Self {
            preset: None,
            quantity: Quantity::Nbar0,
            gc: GcGrid::Range { range: Range { start: 0.9, stop: 1.1, step: 0.01 }, refine: Refinement::Auto },
            ratios: vec![1e6],
            ls: vec![2],
            n_d: None,
            pump_fraction: 0.005,
            stokes_ratio: 2.0,
            time_cap: rabi_core::analytics::DEFAULT_TIME_CAP,
            dissipation: Dissipation { kappa: 0.01, gamma1: 0.01, gamma2: 0.01 },
            numerics: Numerics::default(),
            jobs: 1,
        }
    }
}

impl SweepSpec {
    /// Detuning index used for Raman order `l`. Keeps `|E₀⟩` above
    /// `|μ_{2l}⟩` so that the Stokes frequency stays positive.
    pub fn n_d_for(&self, l: u32) -> u32 {
        self.n_d.unwrap_or((l + 2).max(2 * l))
    }

    pub fn validate(&self) -> Result<()> {
        let cfg = |m: String| Err(SweepError::Config(m));
        self.gc.points()?;
        if self.ratios.is_empty() {
            return cfg("model.ratios is empty".into());
        }
        if self.ratios.iter().any(|r| !(r.is_finite() && *r > 0.0)) {
            return cfg("model.ratios must be positive".into());
        }
        if self.ls.is_empty() || self.ls.contains(&0) {
            return cfg("drive.l must list Raman orders >= 1".into());
        }
        if !(self.pump_fraction.is_finite() && self.pump_fraction > 0.0) {
            return cfg("drive.pump_fraction must be positive".into());
        }
        if !(self.stokes_ratio.is_finite() && self.stokes_ratio >= 0.0) {
            return cfg("drive.stokes_ratio must be non-negative".into());
        }
        if !(self.time_cap.is_finite() && self.time_cap > 0.0) {
            return cfg("drive.time_cap must be positive".into());
        }
        rabi_core::dressed::DissipationParams::new(
            self.dissipation.kappa,
            self.dissipation.gamma1,
            self.dissipation.gamma2,
        )?;
        let n = &self.numerics;
        if n.dressed_m < 3 {
            return cfg("numerics.dressed_m must be at least 3".into());
        }
        if n.n_fock.is_some_and(|v| v < 2) {
            return cfg("numerics.n_fock must be at least 2".into());
        }
        if n.seed_m.is_some_and(|v| v == 0 || v > 48) {
            return cfg("numerics.seed_m must lie in 1..=48".into());
        }
        if !(n.ss_max_time > 0.0 && n.ss_rel_tol > 0.0) {
            return cfg("numerics.ss_max_time and ss_rel_tol must be positive".into());
        }
        if n.delta.is_some_and(|d| !(1e-5..=1e-2).contains(&d)) {
            return cfg("numerics.delta must lie in [1e-5, 1e-2]".into());
        }
        if self.jobs == 0 {
            return cfg("sweep.jobs must be at least 1".into());
        }
        Ok(())
    }
}

pub const PRESETS: &[&str] = &["fig2a", "fig2b", "fig3", "fig4", "fig5", "fig5a", "fig5b"];

fn coarse_with_window() -> GcGrid {
    GcGrid::Range {
        range: Range { start: 0.9, stop: 1.1, step: 0.01 },
        refine: Refinement::Window(Range { start: 0.99, stop: 1.01, step: 0.001 }),
    }
}

/// The named figure preset.
pub fn preset(name: &str) -> Result<SweepSpec> {
    let base = SweepSpec { preset: Some(name.to_string()), ..SweepSpec::default() };
    let spec = match name {
        "fig2a" => SweepSpec {
            quantity: Quantity::Dnbar0,
            gc: GcGrid::Range { range: Range { start: 0.8, stop: 1.2, step: 0.01 }, refine: Refinement::Auto },
            ratios: vec![1e2, 1e4, 1e6],
            ..base
        },
        "fig2b" => SweepSpec {
            quantity: Quantity::C2k,
            gc: GcGrid::Range { range: Range { start: 0.9, stop: 1.1, step: 0.01 }, refine: Refinement::Auto },
            ratios: vec![1e6],
            numerics: Numerics { k_max: 5, ..Numerics::default() },
            ..base
        },
        "fig3" => SweepSpec {
            quantity: Quantity::NmaxE,
            gc: GcGrid::Range { range: Range { start: 0.9, stop: 1.1, step: 0.01 }, refine: Refinement::Auto },
            ratios: vec![1e6],
            ls: vec![1, 2, 3, 4],
            ..base
        },
        "fig4" => SweepSpec {
            quantity: Quantity::Nmax,
            gc: coarse_with_window(),
            ratios: vec![1e6],
            ls: vec![1, 2, 3, 4],
            ..base
        },
        "fig5" | "fig5a" | "fig5b" => SweepSpec {
            quantity: if name == "fig5b" { Quantity::DphiOutSs } else { Quantity::PhiOutSs },
            gc: coarse_with_window(),
            ratios: vec![1e2, 1e4, 1e6],
            ls: vec![2],
            pump_fraction: 0.05,
            ..base
        },
        other => {
            return Err(SweepError::Config(format!("unknown preset `{other}`; available: {}", PRESETS.join(", "))))
        }
    };
    Ok(spec)
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    preset: Option<String>,
    #[serde(default)]
    model: RawModel,
    #[serde(default)]
    drive: RawDrive,
    #[serde(default)]
    dissipation: RawDissipation,
    #[serde(default)]
    sweep: RawSweep,
    #[serde(default)]
    numerics: RawNumerics,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawModel {
    ratios: Option<Vec<f64>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDrive {
    l: Option<Vec<u32>>,
    n_d: Option<u32>,
    pump_fraction: Option<f64>,
    stokes_ratio: Option<f64>,
    time_cap: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDissipation {
    kappa: Option<f64>,
    gamma1: Option<f64>,
    gamma2: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSweep {
    quantity: Option<Quantity>,
    gc: Option<RawGrid>,
    jobs: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    values: Option<Vec<f64>>,
    range: Option<Range>,
    refine: Option<Refinement>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawNumerics {
    n_fock: Option<usize>,
    truncation_check: Option<bool>,
    dressed_m: Option<usize>,
    k_max: Option<usize>,
    delta: Option<f64>,
    steady_method: Option<SteadyMethodName>,
    seed_m: Option<usize>,
    ss_max_time: Option<f64>,
    ss_rel_tol: Option<f64>,
    m_doubling_check: Option<bool>,
}

fn set<T>(slot: &mut T, v: Option<T>) {
    if let Some(v) = v {
        *slot = v;
    }
}

/// Parses and resolves a JSON configuration document.
pub fn parse_config(text: &str) -> Result<SweepSpec> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let raw: RawConfig = serde_path_to_error::deserialize(de)
        .map_err(|e| SweepError::Config(format!("at `{}`: {}", e.path(), e.inner())))?;
    let mut spec = match &raw.preset {
        Some(name) => preset(name)?,
        None => SweepSpec::default(),
    };
    set(&mut spec.ratios, raw.model.ratios);
    set(&mut spec.ls, raw.drive.l);
    if raw.drive.n_d.is_some() {
        spec.n_d = raw.drive.n_d;
    }
    set(&mut spec.pump_fraction, raw.drive.pump_fraction);
    set(&mut spec.stokes_ratio, raw.drive.stokes_ratio);
    set(&mut spec.time_cap, raw.drive.time_cap);
    set(&mut spec.dissipation.kappa, raw.dissipation.kappa);
    set(&mut spec.dissipation.gamma1, raw.dissipation.gamma1);
    set(&mut spec.dissipation.gamma2, raw.dissipation.gamma2);
    set(&mut spec.quantity, raw.sweep.quantity);
    set(&mut spec.jobs, raw.sweep.jobs);
    if let Some(g) = raw.sweep.gc {
        spec.gc = match (g.values, g.range) {
            (Some(v), None) => {
                if g.refine.is_some() {
                    return Err(SweepError::Config("at `sweep.gc.refine`: only valid with a range".into()));
                }
                GcGrid::Values(v)
            }
            (None, Some(range)) => GcGrid::Range { range, refine: g.refine.unwrap_or(Refinement::Auto) },
            _ => return Err(SweepError::Config("at `sweep.gc`: give exactly one of `values` or `range`".into())),
        };
    }
    let n = raw.numerics;
    if n.n_fock.is_some() {
        spec.numerics.n_fock = n.n_fock;
    }
    if n.delta.is_some() {
        spec.numerics.delta = n.delta;
    }
    set(&mut spec.numerics.truncation_check, n.truncation_check);
    set(&mut spec.numerics.dressed_m, n.dressed_m);
    set(&mut spec.numerics.k_max, n.k_max);
    set(&mut spec.numerics.steady_method, n.steady_method);
    if n.seed_m.is_some() {
        spec.numerics.seed_m = n.seed_m;
    }
    set(&mut spec.numerics.ss_max_time, n.ss_max_time);
    set(&mut spec.numerics.ss_rel_tol, n.ss_rel_tol);
    set(&mut spec.numerics.m_doubling_check, n.m_doubling_check);
    spec.validate()?;
    Ok(spec)
}

/// Reads and resolves a configuration file.
pub fn load_config(path: &Path) -> Result<SweepSpec> {
    let text = std::fs::read_to_string(path).map_err(|source| SweepError::Io { path: path.to_path_buf(), source })?;
    parse_config(&text)
}

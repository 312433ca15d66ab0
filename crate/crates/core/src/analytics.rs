// Copyright 2026 The rabi-qpt Authors
// SPDX-License-Identifier: Apache-2.0

//! Closed-form quantities of the low-energy effective theory on both sides
//! of the critical point, and the three-level Raman model.

use ndarray::Array2;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::hermite::hermite_log;
use crate::operator::Operator;
use crate::rabi::{DriveSpec, RabiState};
use crate::operator::Level;

/// Default evolution-time cap, in units of `1/ω`.
pub const DEFAULT_TIME_CAP: f64 = 1e6;

/// Width of the band around `g_c = 1` treated as critical.
pub const CRITICAL_BAND: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Phase {
    Normal,
    Superradiant,
    Critical,
}

/// Effective-theory parameters at one `(g_c, Ω/ω)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhasePoint {
    pub gc: f64,
    pub freq_ratio: f64,
    pub phase: Phase,
    r_np: Option<f64>,
    eps_np: Option<f64>,
    r_sp: Option<f64>,
    alpha: Option<f64>,
    eps_sp: Option<f64>,
}

fn branch(v: Option<f64>, name: &str, phase: Phase) -> Result<f64> {
    v.ok_or_else(|| Error::Domain(format!("{name} is undefined in the {phase:?} phase")))
}

impl PhasePoint {
    pub fn r_np(&self) -> Result<f64> {
        branch(self.r_np, "r_np", self.phase)
    }

    pub fn eps_np(&self) -> Result<f64> {
        branch(self.eps_np, "eps_np", self.phase)
    }

    pub fn r_sp(&self) -> Result<f64> {
        branch(self.r_sp, "r_sp", self.phase)
    }

    pub fn alpha(&self) -> Result<f64> {
        branch(self.alpha, "alpha", self.phase)
    }

    pub fn eps_sp(&self) -> Result<f64> {
        branch(self.eps_sp, "eps_sp", self.phase)
    }
}

/// Squeezing, displacement and excitation energy from the closed forms.
pub fn critical_quantities(gc: f64, freq_ratio: f64) -> Result<PhasePoint> {
    if !(gc >= 0.0 && gc.is_finite()) {
        return Err(Error::Domain(format!("g_c must be non-negative, got {gc}")));
    }
    if !(freq_ratio > 0.0 && freq_ratio.is_finite()) {
        return Err(Error::Domain(format!("Omega/omega must be positive, got {freq_ratio}")));
    }
    let mut p = PhasePoint {
        gc,
        freq_ratio,
        phase: Phase::Critical,
        r_np: None,
        eps_np: None,
        r_sp: None,
        alpha: None,
        eps_sp: None,
    };
    if (gc - 1.0).abs() < CRITICAL_BAND {
        return Ok(p);
    }
    if gc < 1.0 {
        let s = 1.0 - gc * gc;
        p.phase = Phase::Normal;
        p.r_np = Some(-0.25 * s.ln());
        p.eps_np = Some(s.sqrt());
    } else {
        let s = 1.0 - gc.powi(-4);
        p.phase = Phase::Superradiant;
        p.r_sp = Some(-0.25 * s.ln());
        p.eps_sp = Some(s.sqrt());
        p.alpha = Some(0.5 * (freq_ratio * (gc * gc - gc.powi(-2))).sqrt());
    }
    Ok(p)
}

fn ln_factorial(n: usize) -> f64 {
    (2..=n).map(|i| (i as f64).ln()).sum()
}

/// `|c_2k|` from the branch formulas, evaluated in log space.
pub fn c2k_closed(k: usize, point: &PhasePoint) -> Result<f64> {
    match point.phase {
        Phase::Critical => Err(Error::Domain("c_2k closed form is undefined at g_c = 1".into())),
        Phase::Normal => {
            let r = point.r_np()?;
            let log_base = 0.5 * ln_factorial(2 * k)
                - k as f64 * 2f64.ln()
                - ln_factorial(k)
                - 0.5 * r.cosh().ln();
            if k == 0 {
                return Ok(log_base.exp());
            }
            let t = r.tanh();
            if t == 0.0 {
                return Ok(0.0);
            }
            Ok((k as f64 * t.ln() + log_base).exp())
        }
        Phase::Superradiant => {
            let r = point.r_sp()?;
            let alpha = point.alpha()?;
            let t = r.tanh();
            let x = alpha * r.exp() / (2.0 * r).sinh().sqrt();
            let h = hermite_log(2 * k, x)?;
            if h.sign == 0.0 {
                return Ok(0.0);
            }
            let log_tanh = if k == 0 { 0.0 } else { k as f64 * t.ln() };
            let log_val = log_tanh - 0.5 * alpha * alpha * (1.0 + t)
                - k as f64 * 2f64.ln()
                - 0.5 * ln_factorial(2 * k)
                - 0.5 * r.cosh().ln()
                + h.log_abs;
            Ok(log_val.exp())
        }
    }
}

/// `ω_μ = E₀ − [2(n_d − l) + 0.25]ω` with `ω = 1`.
pub fn omega_mu_of(e0: f64, n_d: u32, l: u32) -> Result<f64> {
    if l == 0 || n_d < l {
        return Err(Error::Domain(format!("need n_d >= l >= 1, got n_d = {n_d}, l = {l}")));
    }
    Ok(e0 - (2.0 * f64::from(n_d - l) + 0.25))
}

/// `ω_p = E₀ − ω_μ`, `ω_s = ω_p − 2l`.
pub fn drive_frequencies(e0: f64, omega_mu: f64, l: u32) -> Result<(f64, f64)> {
    if e0 <= omega_mu {
        return Err(Error::Config(format!("need E0 > omega_mu, got E0 = {e0}, omega_mu = {omega_mu}")));
    }
    let wp = e0 - omega_mu;
    let ws = wp - 2.0 * f64::from(l);
    if wp <= 0.0 || ws <= 0.0 {
        return Err(Error::Config(format!(
            "drive frequencies must be positive, got omega_p = {wp}, omega_s = {ws} for l = {l}"
        )));
    }
    Ok((wp, ws))
}

/// Amplitudes of the Λ system `|μ₀⟩ ↔ |E₀⟩ ↔ |μ_2l⟩`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RamanTriple {
    pub c0: C64,
    pub c2l: C64,
    pub amp_p: f64,
    pub amp_s: f64,
    pub xi: f64,
    /// Drives are weak compared with `E₂ − E₀`.
    pub weak: bool,
}

impl RamanTriple {
    pub fn new(c0: C64, c2l: C64, amp_p: f64, amp_s: f64) -> Self {
        let x = c0.norm() * amp_p;
        let y = c2l.norm() * amp_s;
        let xi = 0.5 * (x * x + y * y).sqrt();
        Self { c0, c2l, amp_p, amp_s, xi, weak: true }
    }

    /// Amplitudes from the ground state of `H_R` and a drive.
    pub fn from_ground(ground: &RabiState, drive: &DriveSpec) -> Self {
        let c0 = C64::new(ground.amplitude(Level::G, 0), 0.0);
        let c2l = C64::new(ground.amplitude(Level::G, 2 * drive.l as usize), 0.0);
        let mut t = Self::new(c0, c2l, drive.amp_p, drive.amp_s);
        t.weak = drive.weak;
        t
    }

    fn couplings(&self) -> (f64, f64) {
        (self.c0.norm() * self.amp_p, self.c2l.norm() * self.amp_s)
    }
}

/// `P_2l(t) = (c₀Ω_p c_2lΩ_s)/(4Ξ²)[cos(Ξt) − 1]`, magnitudes only.
pub fn p2l_analytic(triple: &RamanTriple, t: f64) -> Result<C64> {
    if !(t >= 0.0) {
        return Err(Error::Domain(format!("time must be non-negative, got {t}")));
    }
    let (x, y) = triple.couplings();
    if triple.xi == 0.0 {
        return Ok(C64::new(0.0, 0.0));
    }
    let xi2 = triple.xi * triple.xi;
    Ok(C64::new(x * y / (4.0 * xi2) * ((triple.xi * t).cos() - 1.0), 0.0))
}

/// Time of maximal transfer, `min(π/Ξ, cap)`.
pub fn transfer_time(triple: &RamanTriple, time_cap: Option<f64>) -> Result<f64> {
    let natural = if triple.xi > 0.0 { std::f64::consts::PI / triple.xi } else { f64::INFINITY };
    match time_cap {
        Some(cap) if cap > 0.0 => Ok(natural.min(cap)),
        Some(cap) => Err(Error::Config(format!("time cap must be positive, got {cap}"))),
        None if natural.is_finite() => Ok(natural),
        None => Err(Error::Contract("Ξ = 0 and no evolution-time cap".into())),
    }
}

/// `n̄^e_max = 2l |P_2l(t*)|²` with `t* = min(π/Ξ, cap)`.
pub fn nmax_e(triple: &RamanTriple, l: u32, time_cap: Option<f64>) -> Result<f64> {
    let t = transfer_time(triple, time_cap)?;
    let p = p2l_analytic(triple, t)?;
    Ok(2.0 * f64::from(l) * p.norm_sqr())
}

/// The 3×3 effective Hamiltonian on `{|μ₀⟩, |E₀⟩, |μ_2l⟩}`.
pub fn heff_matrix(triple: &RamanTriple) -> Result<Operator> {
    if !triple.weak {
        return Err(Error::Contract("effective Raman model needs weak drives".into()));
    }
    let (x, y) = triple.couplings();
    let mut m = Array2::<f64>::zeros((3, 3));
    m[[0, 1]] = 0.5 * x;
    m[[1, 0]] = 0.5 * x;
    m[[2, 1]] = 0.5 * y;
    m[[1, 2]] = 0.5 * y;
    Operator::from_real(&m)
}

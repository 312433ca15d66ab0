// Copyright 2026 The rabi-qpt Authors
// SPDX-License-Identifier: Apache-2.0

//! The quantum Rabi Hamiltonian, its three-level extension and the drive.
//!
//! Energies are in units of the cavity frequency unless `omega` is set
//! explicitly. Spectra of `H_R` are computed on its two parity chains: the
//! operator `exp(iπ(a†a + |e⟩⟨e|))` commutes with `H_R`, and each parity
//! block is a symmetric tridiagonal matrix indexed by the Fock number `s`.
//! In the even chain site `s` is `|s⟩|g⟩` for even `s` and `|s⟩|e⟩` for odd
//! `s`; the odd chain swaps the roles.

use ndarray::Array1;
use num_complex::Complex64 as C64;

use crate::analytics;
use crate::error::{Error, Result};
use crate::linalg::SymTridiagonal;
use crate::operator::{atomic_outer, fock_ops, HilbertConfig, Level, Operator};

/// Physical parameters of the model.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModelParams {
    omega: f64,
    big_omega: f64,
    g: f64,
    omega_mu: Option<f64>,
}

/// `g_c = 2g/√(ωΩ)`.
pub fn gc_from_g(g: f64, omega: f64, big_omega: f64) -> f64 {
    2.0 * g / (omega * big_omega).sqrt()
}

/// `g = g_c √(ωΩ) / 2`.
pub fn g_from_gc(gc: f64, omega: f64, big_omega: f64) -> f64 {
    0.5 * gc * (omega * big_omega).sqrt()
}

impl ModelParams {
    pub fn new(omega: f64, big_omega: f64, g: f64) -> Result<Self> {
        if !(omega > 0.0 && omega.is_finite()) {
            return Err(Error::Config(format!("omega must be positive, got {omega}")));
        }
        if !(big_omega > 0.0 && big_omega.is_finite()) {
            return Err(Error::Config(format!("Omega must be positive, got {big_omega}")));
        }
        if !(g >= 0.0 && g.is_finite()) {
            return Err(Error::Config(format!("g must be non-negative, got {g}")));
        }
        Ok(Self { omega, big_omega, g, omega_mu: None })
    }

    /// `ω = 1`, `Ω = ratio`, coupling from `g_c`.
    pub fn from_gc(gc: f64, ratio: f64) -> Result<Self> {
        if !(gc >= 0.0 && gc.is_finite()) {
            return Err(Error::Config(format!("g_c must be non-negative, got {gc}")));
        }
        if !(ratio > 0.0 && ratio.is_finite()) {
            return Err(Error::Config(format!("Omega/omega must be positive, got {ratio}")));
        }
        Self::new(1.0, ratio, g_from_gc(gc, 1.0, ratio))
    }

    /// Adds the third level. Requires `ω_μ < 0` and `|ω_μ| ≥ 3ω`.
    pub fn with_omega_mu(mut self, omega_mu: f64) -> Result<Self> {
        if !(omega_mu.is_finite() && omega_mu < 0.0 && omega_mu.abs() >= 3.0 * self.omega) {
            return Err(Error::Config(format!(
                "omega_mu must satisfy omega_mu < 0 and |omega_mu| >= 3 omega, got {omega_mu}"
            )));
        }
        self.omega_mu = Some(omega_mu);
        Ok(self)
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn big_omega(&self) -> f64 {
        self.big_omega
    }

    pub fn g(&self) -> f64 {
        self.g
    }

    pub fn gc(&self) -> f64 {
        gc_from_g(self.g, self.omega, self.big_omega)
    }

    pub fn ratio(&self) -> f64 {
        self.big_omega / self.omega
    }

    pub fn omega_mu(&self) -> Option<f64> {
        self.omega_mu
    }

    fn with_gc(&self, gc: f64) -> Result<Self> {
        let mut p = Self::new(self.omega, self.big_omega, g_from_gc(gc, self.omega, self.big_omega))?;
        p.omega_mu = self.omega_mu;
        Ok(p)
    }
}

/// Dense `H_R` on a two- or three-level space. The `|μ⟩` block is zero.
pub fn build_hr(p: &ModelParams, cfg: &HilbertConfig) -> Result<Operator> {
    let fock = fock_ops(cfg);
    let pg = atomic_outer(cfg, Level::G, Level::G)?;
    let pe = atomic_outer(cfg, Level::E, Level::E)?;
    let sx = &atomic_outer(cfg, Level::G, Level::E)? + &atomic_outer(cfg, Level::E, Level::G)?;
    let x = &fock.a + &fock.a_dag;
    let cavity = (&fock.n_op * &(&pg + &pe)).scale_real(p.omega);
    let atom = pe.scale_real(p.big_omega);
    let coupling = (&x * &sx).scale_real(-p.g);
    Ok(&(&cavity + &atom) + &coupling)
}

/// Dense `H_0 = H_R + (ω_μ + ω a†a)|μ⟩⟨μ|`.
pub fn build_h0(p: &ModelParams, cfg: &HilbertConfig) -> Result<Operator> {
    if cfg.atom_dim() != 3 {
        return Err(Error::Config("H_0 needs a three-level atom".into()));
    }
    let omega_mu = p
        .omega_mu
        .ok_or_else(|| Error::Config("H_0 needs omega_mu".into()))?;
    let fock = fock_ops(cfg);
    let pmu = atomic_outer(cfg, Level::Mu, Level::Mu)?;
    let mu_sector = &pmu.scale_real(omega_mu) + &(&fock.n_op * &pmu).scale_real(p.omega);
    Ok(&build_hr(p, cfg)? + &mu_sector)
}

/// Two-tone drive parameters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DriveSpec {
    /// Pump amplitude `Ω_p`.
    pub amp_p: f64,
    /// Stokes amplitude `Ω_s`.
    pub amp_s: f64,
    /// Pump frequency `ω_p`.
    pub freq_p: f64,
    /// Stokes frequency `ω_s`.
    pub freq_s: f64,
    /// Half the target photon number.
    pub l: u32,
    /// Detuning selector for `ω_μ`.
    pub n_d: u32,
    /// Both amplitudes below a tenth of `E₂ − E₀`.
    pub weak: bool,
}

impl DriveSpec {
    /// Explicit drive. `gap` is `E₂ − E₀` and only sets the weak flag.
    pub fn new(amp_p: f64, amp_s: f64, freq_p: f64, freq_s: f64, l: u32, n_d: u32, gap: f64) -> Result<Self> {
        if l == 0 || n_d < l {
            return Err(Error::Config(format!("need n_d >= l >= 1, got l = {l}, n_d = {n_d}")));
        }
        for (name, v) in [("amp_p", amp_p), ("amp_s", amp_s), ("freq_p", freq_p), ("freq_s", freq_s)] {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::Config(format!("{name} must be finite and non-negative, got {v}")));
            }
        }
        let weak = amp_p < 0.1 * gap && amp_s < 0.1 * gap;
        Ok(Self { amp_p, amp_s, freq_p, freq_s, l, n_d, weak })
    }

    /// Resonant drive calibrated on the numerical spectrum: returns the drive
    /// and the matching `ω_μ`. Amplitudes are `Ω_p = pump_fraction (E₂ − E₀)`
    /// and `Ω_s = stokes_ratio Ω_p`.
    pub fn resonant(
        e0: f64,
        e2: f64,
        l: u32,
        n_d: u32,
        pump_fraction: f64,
        stokes_ratio: f64,
    ) -> Result<(Self, f64)> {
        let omega_mu = analytics::omega_mu_of(e0, n_d, l)?;
        let (freq_p, freq_s) = analytics::drive_frequencies(e0, omega_mu, l)?;
        let gap = e2 - e0;
        let amp_p = pump_fraction * gap;
        let drive = Self::new(amp_p, stokes_ratio * amp_p, freq_p, freq_s, l, n_d, gap)?;
        Ok((drive, omega_mu))
    }

    /// `f(t) = Ω_p cos(ω_p t) + Ω_s cos(ω_s t)`.
    pub fn coefficient(&self, t: f64) -> f64 {
        self.amp_p * (self.freq_p * t).cos() + self.amp_s * (self.freq_s * t).cos()
    }
}

/// `H_D(t) = f(t)(|μ⟩⟨g| + |g⟩⟨μ|) ⊗ I`.
#[derive(Clone, Debug)]
pub struct DriveField {
    spec: DriveSpec,
    coupling: Operator,
}

impl DriveField {
    pub fn spec(&self) -> &DriveSpec {
        &self.spec
    }

    pub fn coupling(&self) -> &Operator {
        &self.coupling
    }

    pub fn coefficient(&self, t: f64) -> f64 {
        self.spec.coefficient(t)
    }

    pub fn at(&self, t: f64) -> Operator {
        self.coupling.scale_real(self.coefficient(t))
    }
}

pub fn build_hd(d: &DriveSpec, cfg: &HilbertConfig) -> Result<DriveField> {
    if cfg.atom_dim() != 3 {
        return Err(Error::Config("the drive needs a three-level atom".into()));
    }
    let coupling = &atomic_outer(cfg, Level::Mu, Level::G)? + &atomic_outer(cfg, Level::G, Level::Mu)?;
    Ok(DriveField { spec: *d, coupling })
}

/// Parity sector of an `H_R` eigenstate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    /// Whether chain site `s` carries the excited atomic level.
    pub fn is_excited(self, s: usize) -> bool {
        match self {
            Parity::Even => s % 2 == 1,
            Parity::Odd => s % 2 == 0,
        }
    }

    pub fn level(self, s: usize) -> Level {
        if self.is_excited(s) {
            Level::E
        } else {
            Level::G
        }
    }
}

/// The parity block of `H_R` as a tridiagonal matrix of size `n_fock`.
pub fn parity_chain(p: &ModelParams, n_fock: usize, parity: Parity) -> Result<SymTridiagonal> {
    let diag = (0..n_fock)
        .map(|s| p.omega * s as f64 + if parity.is_excited(s) { p.big_omega } else { 0.0 })
        .collect();
    let off = (1..n_fock).map(|s| -p.g * (s as f64).sqrt()).collect();
    SymTridiagonal::new(diag, off)
}

/// One eigenstate of `H_R`, stored as its parity-chain vector.
#[derive(Clone, Debug)]
pub struct RabiState {
    pub energy: f64,
    pub parity: Parity,
    pub chain: Vec<f64>,
}

impl RabiState {
    /// `⟨level, n | state⟩`.
    pub fn amplitude(&self, level: Level, n: usize) -> f64 {
        match self.chain.get(n) {
            Some(&v) if self.parity.level(n) == level => v,
            _ => 0.0,
        }
    }

    /// `⟨a†a⟩`.
    pub fn nbar(&self) -> f64 {
        self.chain.iter().enumerate().map(|(s, v)| s as f64 * v * v).sum()
    }

    /// Dense embedding into `cfg`, which must hold at least the chain length.
    pub fn to_dense(&self, cfg: &HilbertConfig) -> Result<Array1<C64>> {
        if cfg.n_fock() < self.chain.len() {
            return Err(Error::Config(format!(
                "n_fock {} smaller than chain length {}",
                cfg.n_fock(),
                self.chain.len()
            )));
        }
        let mut v = Array1::zeros(cfg.dim());
        for (s, &x) in self.chain.iter().enumerate() {
            let idx = cfg.index(self.parity.level(s), s).expect("level present in config");
            v[idx] = C64::new(x, 0.0);
        }
        Ok(v)
    }
}

/// `⟨u|(a + a†)|v⟩` between chain vectors of opposite parity (zero otherwise).
pub fn quadrature_element(u: &RabiState, v: &RabiState) -> f64 {
    if u.parity == v.parity {
        return 0.0;
    }
    let n = u.chain.len().min(v.chain.len());
    let mut acc = 0.0;
    for t in 0..n {
        let mut xv = 0.0;
        if t > 0 {
            xv += (t as f64).sqrt() * v.chain[t - 1];
        }
        if t + 1 < n {
            xv += ((t + 1) as f64).sqrt() * v.chain[t + 1];
        }
        acc += u.chain[t] * xv;
    }
    acc
}

/// `⟨u|(|g⟩⟨e| + |e⟩⟨g|)|v⟩`: the atomic flip maps site `s` of one chain to
/// site `s` of the other.
pub fn sigma_x_element(u: &RabiState, v: &RabiState) -> f64 {
    if u.parity == v.parity {
        return 0.0;
    }
    u.chain.iter().zip(&v.chain).map(|(a, b)| a * b).sum()
}

/// Lowest part of the `H_R` spectrum from both parity chains.
#[derive(Clone, Debug)]
pub struct RabiSpectrum {
    params: ModelParams,
    n_fock: usize,
    states: Vec<RabiState>,
}

impl RabiSpectrum {
    /// The `per_parity` lowest states of each chain, merged in ascending
    /// order. Energies closer than the chain's roundoff scale count as ties
    /// and are ordered even first.
    pub fn compute(p: &ModelParams, n_fock: usize, per_parity: usize) -> Result<Self> {
        if n_fock < 2 {
            return Err(Error::Config(format!("n_fock must be at least 2, got {n_fock}")));
        }
        let mut states = Vec::with_capacity(2 * per_parity);
        let mut scale: f64 = 0.0;
        for parity in [Parity::Even, Parity::Odd] {
            let chain = parity_chain(p, n_fock, parity)?;
            scale = scale.max(chain.norm_bound());
            let (vals, vecs) = chain.lowest_pairs(per_parity);
            for (energy, v) in vals.into_iter().zip(vecs) {
                if !energy.is_finite() || v.iter().any(|x| !x.is_finite()) {
                    return Err(Error::Numeric("non-finite eigenpair in parity chain".into()));
                }
                states.push(RabiState { energy, parity, chain: v });
            }
        }
        states.sort_by(|a, b| a.energy.total_cmp(&b.energy).then(a.parity.cmp(&b.parity)));
        let tie = 64.0 * f64::EPSILON * scale.max(1.0);
        let mut swapped = true;
        while swapped {
            swapped = false;
            for i in 1..states.len() {
                let (a, b) = (&states[i - 1], &states[i]);
                if a.parity == Parity::Odd && b.parity == Parity::Even && (b.energy - a.energy) <= tie {
                    states.swap(i - 1, i);
                    swapped = true;
                }
            }
        }
        Ok(Self { params: *p, n_fock, states })
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn n_fock(&self) -> usize {
        self.n_fock
    }

    pub fn states(&self) -> &[RabiState] {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn state(&self, j: usize) -> Result<&RabiState> {
        self.states
            .get(j)
            .ok_or_else(|| Error::Config(format!("eigenstate {j} not computed ({} available)", self.len())))
    }

    pub fn energy(&self, j: usize) -> Result<f64> {
        Ok(self.state(j)?.energy)
    }

    pub fn ground(&self) -> &RabiState {
        &self.states[0]
    }

    /// `E_j − E_0`.
    pub fn gap(&self, j: usize) -> Result<f64> {
        Ok(self.energy(j)? - self.states[0].energy)
    }
}

/// Ground state of `H_R` only: the lowest even-chain state.
pub fn ground_state(p: &ModelParams, n_fock: usize) -> Result<RabiState> {
    let chain = parity_chain(p, n_fock, Parity::Even)?;
    let (vals, mut vecs) = chain.lowest_pairs(1);
    let energy = vals[0];
    let v = vecs.remove(0);
    if !energy.is_finite() || v.iter().any(|x| !x.is_finite()) {
        return Err(Error::Numeric("non-finite ground state".into()));
    }
    Ok(RabiState { energy, parity: Parity::Even, chain: v })
}

/// Truncation policy for observables of `H_R`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TruncationPolicy {
    /// Starting truncation; `None` uses [`default_n_fock`].
    pub n_fock: Option<usize>,
    /// Run the `n → n + step` comparison.
    pub check: bool,
    pub step: usize,
    pub rel_tol: f64,
    /// Differences below this are ignored regardless of `rel_tol`.
    pub abs_floor: f64,
    pub max_n_fock: usize,
}

impl Default for TruncationPolicy {
    fn default() -> Self {
        Self { n_fock: None, check: true, step: 32, rel_tol: 1e-6, abs_floor: 1e-12, max_n_fock: 1 << 23 }
    }
}

impl TruncationPolicy {
    pub fn fixed(n_fock: usize) -> Self {
        Self { n_fock: Some(n_fock), check: false, ..Self::default() }
    }
}

/// `ceil(4(α² + sinh²r + 10))`, at least 128. The squeezing estimate is
/// capped at `(Ω/ω)^{1/3}` where the closed form diverges.
pub fn default_n_fock(p: &ModelParams) -> usize {
    let gc = p.gc();
    let cap = p.ratio().cbrt();
    let (alpha2, sq) = if gc < 1.0 {
        let r = -0.25 * (1.0 - gc * gc).ln();
        (0.0, r.sinh().powi(2))
    } else if gc > 1.0 {
        let r = -0.25 * (1.0 - gc.powi(-4)).ln();
        (0.25 * p.ratio() * (gc * gc - gc.powi(-2)), r.sinh().powi(2))
    } else {
        (0.0, f64::INFINITY)
    };
    let sq = if sq.is_finite() { sq.min(cap) } else { cap };
    let n = (4.0 * (alpha2 + sq + 10.0)).ceil();
    (n as usize).max(128)
}

/// Result of a truncation-checked evaluation.
#[derive(Clone, Debug, PartialEq)]
pub struct Converged<T> {
    pub value: T,
    pub n_fock: usize,
    pub converged: bool,
}

/// Evaluates `f` at increasing truncations until `f(n)` and `f(n + step)`
/// agree, doubling `n` on failure.
pub fn with_truncation<F>(p: &ModelParams, policy: &TruncationPolicy, f: F) -> Result<Converged<Vec<f64>>>
where
    F: Fn(usize) -> Result<Vec<f64>>,
{
    let mut n = policy.n_fock.unwrap_or_else(|| default_n_fock(p)).max(2);
    if !policy.check {
        return Ok(Converged { value: f(n)?, n_fock: n, converged: true });
    }
    loop {
        let a = f(n)?;
        let b = f(n + policy.step)?;
        let worst = a
            .iter()
            .zip(&b)
            .map(|(x, y)| {
                let diff = (x - y).abs();
                if diff <= policy.abs_floor {
                    0.0
                } else {
                    diff / x.abs().max(y.abs())
                }
            })
            .fold(0.0, f64::max);
        if a.len() == b.len() && worst < policy.rel_tol {
            return Ok(Converged { value: b, n_fock: n + policy.step, converged: true });
        }
        if 2 * n > policy.max_n_fock {
            return Err(Error::Truncation(format!(
                "observable not converged at n_fock = {n} (relative change {worst:.2e}), limit {}",
                policy.max_n_fock
            )));
        }
        n *= 2;
    }
}

/// `n̄₀ = ⟨E₀|a†a|E₀⟩` at fixed truncation.
pub fn nbar0(p: &ModelParams, n_fock: usize) -> Result<f64> {
    if p.g == 0.0 {
        return Ok(0.0);
    }
    Ok(ground_state(p, n_fock)?.nbar())
}

/// Truncation-checked `n̄₀`.
pub fn nbar0_converged(p: &ModelParams, policy: &TruncationPolicy) -> Result<Converged<f64>> {
    let c = with_truncation(p, policy, |n| Ok(vec![nbar0(p, n)?]))?;
    Ok(Converged { value: c.value[0], n_fock: c.n_fock, converged: c.converged })
}

/// `c_k = ⟨g|⟨k|E₀⟩` at fixed truncation.
pub fn ck_numeric(p: &ModelParams, n_fock: usize, k: usize) -> Result<C64> {
    if k >= n_fock {
        return Err(Error::Config(format!("k = {k} must be below n_fock = {n_fock}")));
    }
    Ok(C64::new(ground_state(p, n_fock)?.amplitude(Level::G, k), 0.0))
}

/// `c_0 … c_{k_max}` from one diagonalization, truncation-checked.
pub fn ck_converged(p: &ModelParams, policy: &TruncationPolicy, k_max: usize) -> Result<Converged<Vec<f64>>> {
    with_truncation(p, policy, |n| {
        if k_max >= n {
            return Err(Error::Config(format!("k = {k_max} must be below n_fock = {n}")));
        }
        let gs = ground_state(p, n)?;
        Ok((0..=k_max).map(|k| gs.amplitude(Level::G, k)).collect())
    })
}

/// Finite-difference derivative of `n̄₀`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DerivativeReport {
    /// `(n̄₀(g_c+δ) − n̄₀(g_c−δ)) / 2δ`.
    Central(f64),
    /// The stencil crosses `g_c = 1`: one-sided differences on each side.
    Straddle { left: f64, right: f64 },
}

/// Step used when none is given: `1e-4` within `|g_c − 1| < 1e-2`, else `1e-3`.
pub fn default_delta(gc: f64) -> f64 {
    if (gc - 1.0).abs() < 1e-2 {
        1e-4
    } else {
        1e-3
    }
}

/// `d n̄₀ / d g_c`. Negative stencil points use `n̄₀(−g_c) = n̄₀(g_c)`.
pub fn dnbar0_dgc(p: &ModelParams, policy: &TruncationPolicy, delta: f64) -> Result<DerivativeReport> {
    if !(1e-5..=1e-2).contains(&delta) {
        return Err(Error::Config(format!("delta must lie in [1e-5, 1e-2], got {delta}")));
    }
    let gc = p.gc();
    let eval = |x: f64| -> Result<f64> {
        let q = p.with_gc(x.abs())?;
        Ok(nbar0_converged(&q, policy)?.value)
    };
    let (lo, hi) = (gc - delta, gc + delta);
    if lo < 1.0 && hi >= 1.0 {
        let mid = eval(gc)?;
        return Ok(DerivativeReport::Straddle {
            left: (mid - eval(lo)?) / delta,
            right: (eval(hi)? - mid) / delta,
        });
    }
    Ok(DerivativeReport::Central((eval(hi)? - eval(lo)?) / (2.0 * delta)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::herm_eig;
    use approx::assert_abs_diff_eq;

    #[test]
    fn gc_round_trip() {
        for &g in &[0.0, 0.3, 17.0, 499.5] {
            let gc = gc_from_g(g, 1.0, 1e6);
            assert!((g_from_gc(gc, 1.0, 1e6) - g).abs() <= 1e-12 * g.max(1.0));
        }
        let p = ModelParams::from_gc(0.7, 1e4).unwrap();
        assert_abs_diff_eq!(p.gc(), 0.7, epsilon = 1e-14);
    }

    #[test]
    fn parameter_validation() {
        assert!(ModelParams::new(0.0, 1.0, 0.1).is_err());
        assert!(ModelParams::new(1.0, -1.0, 0.1).is_err());
        assert!(ModelParams::new(1.0, 1.0, -0.1).is_err());
        let p = ModelParams::from_gc(0.5, 100.0).unwrap();
        assert!(p.with_omega_mu(-2.0).is_err());
        assert!(p.with_omega_mu(1.0).is_err());
        assert!(p.with_omega_mu(-4.5).is_ok());
    }

    #[test]
    fn decoupled_spectrum() {
        let p = ModelParams::new(1.0, 10.0, 0.0).unwrap();
        let cfg = HilbertConfig::two_level(8).unwrap();
        let h = build_hr(&p, &cfg).unwrap();
        let eig = herm_eig(&h).unwrap();
        let mut want: Vec<f64> = (0..8).map(|n| n as f64).chain((0..8).map(|n| n as f64 + 10.0)).collect();
        want.sort_by(f64::total_cmp);
        for (a, b) in eig.values.iter().zip(&want) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-12);
        }
        let gs = eig.vector(0);
        assert_abs_diff_eq!(gs[cfg.index(Level::G, 0).unwrap()].re, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn dense_matrix_is_real_symmetric() {
        let p = ModelParams::from_gc(0.8, 50.0).unwrap();
        let cfg = HilbertConfig::three_level(12).unwrap();
        let h = build_hr(&p, &cfg).unwrap();
        assert!(h.matrix().iter().all(|z| z.im == 0.0));
        assert_eq!(h.hermiticity_defect(), 0.0);
    }

    #[test]
    fn chain_spectrum_matches_dense() {
        let p = ModelParams::from_gc(1.2, 30.0).unwrap();
        let n = 48;
        let cfg = HilbertConfig::two_level(n).unwrap();
        let dense = herm_eig(&build_hr(&p, &cfg).unwrap()).unwrap();
        let spec = RabiSpectrum::compute(&p, n, 6).unwrap();
        for j in 0..8 {
            assert_abs_diff_eq!(spec.energy(j).unwrap(), dense.values[j], epsilon = 1e-8);
        }
        let v = spec.ground().to_dense(&cfg).unwrap();
        let overlap: C64 = v.iter().zip(dense.vector(0).iter()).map(|(a, b)| a.conj() * b).sum();
        assert!(overlap.norm() > 1.0 - 1e-8);
    }

    #[test]
    fn h0_block_structure() {
        let p = ModelParams::from_gc(0.7, 100.0).unwrap().with_omega_mu(-5.0).unwrap();
        let cfg = HilbertConfig::three_level(10).unwrap();
        let h0 = build_h0(&p, &cfg).unwrap();
        let pmu = atomic_outer(&cfg, Level::Mu, Level::Mu).unwrap();
        assert_eq!(h0.commutator(&pmu).max_abs(), 0.0);
        for n in 0..10 {
            let i = cfg.index(Level::Mu, n).unwrap();
            assert_abs_diff_eq!(h0.get(i, i).re, n as f64 - 5.0, epsilon = 1e-14);
        }
        assert!(build_h0(&p, &HilbertConfig::two_level(10).unwrap()).is_err());
        let eig = herm_eig(&h0).unwrap();
        assert_abs_diff_eq!(eig.vector(0)[cfg.index(Level::Mu, 0).unwrap()].re, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn drive_coefficient() {
        let d = DriveSpec::new(0.3, 0.6, 4.25, 0.25, 2, 4, 10.0).unwrap();
        assert!(d.weak);
        assert_abs_diff_eq!(d.coefficient(0.0), 0.9, epsilon = 1e-15);
        let cfg = HilbertConfig::three_level(4).unwrap();
        let field = build_hd(&d, &cfg).unwrap();
        let op = field.at(0.0);
        let mu0 = cfg.index(Level::Mu, 0).unwrap();
        let g0 = cfg.index(Level::G, 0).unwrap();
        assert_abs_diff_eq!(op.get(mu0, g0).re, 0.9, epsilon = 1e-15);
        let off = DriveSpec::new(0.0, 0.0, 4.25, 0.25, 2, 4, 10.0).unwrap();
        let field = build_hd(&off, &cfg).unwrap();
        assert_eq!(field.at(1.7).max_abs(), 0.0);
        assert!(DriveSpec::new(0.1, 0.1, 1.0, 1.0, 3, 2, 1.0).is_err());
    }

    #[test]
    fn vacuum_at_zero_coupling() {
        let p = ModelParams::from_gc(0.0, 1e6).unwrap();
        assert_eq!(nbar0(&p, 64).unwrap(), 0.0);
        assert_abs_diff_eq!(ck_numeric(&p, 64, 0).unwrap().re, 1.0, epsilon = 1e-14);
        assert!(ck_numeric(&p, 64, 2).unwrap().norm() < 1e-14);
        match dnbar0_dgc(&p, &TruncationPolicy::default(), 1e-3).unwrap() {
            DerivativeReport::Central(d) => assert_eq!(d, 0.0),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn straddle_flag() {
        let p = ModelParams::from_gc(0.99995, 1e2).unwrap();
        let r = dnbar0_dgc(&p, &TruncationPolicy::default(), 1e-4).unwrap();
        assert!(matches!(r, DerivativeReport::Straddle { .. }));
        assert!(dnbar0_dgc(&p, &TruncationPolicy::default(), 0.5).is_err());
    }

    #[test]
    fn default_truncation_grows_in_sp() {
        assert_eq!(default_n_fock(&ModelParams::from_gc(0.5, 1e6).unwrap()), 128);
        let sp = ModelParams::from_gc(1.001, 1e6).unwrap();
        assert!(default_n_fock(&sp) > 4000);
    }
}

// Copyright 2026 The rabi-qpt Authors
// SPDX-License-Identifier: Apache-2.0

//! Dressed eigenbasis of `H_0` truncated to its lowest `M` states, with the
//! operators the open-system dynamics needs.

use std::fmt;

use ndarray::Array2;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::linalg::EigenSystem;
use crate::operator::{atomic_outer, quadrature, HilbertConfig, Level, Operator};
use crate::rabi::{quadrature_element, sigma_x_element, ModelParams, Parity, RabiSpectrum};

/// Energy separation below which two dressed levels count as degenerate.
pub const DEGENERACY_TOL: f64 = 1e-10;

/// Identity of a dressed state.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum StateTag {
    /// `|μ_n⟩ = |n⟩|μ⟩`.
    Mu(usize),
    /// The `rank`-th eigenstate of `H_R` within a parity sector.
    Rabi { parity: Parity, rank: usize },
    /// Not identified.
    Other,
}

impl fmt::Display for StateTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StateTag::Mu(n) => write!(f, "|μ_{n}⟩"),
            StateTag::Rabi { parity, rank } => write!(f, "|R_{parity:?},{rank}⟩"),
            StateTag::Other => write!(f, "|?⟩"),
        }
    }
}

/// Dissipation rates in units of `ω`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DissipationParams {
    pub kappa: f64,
    pub gamma1: f64,
    pub gamma2: f64,
}

impl DissipationParams {
    pub fn new(kappa: f64, gamma1: f64, gamma2: f64) -> Result<Self> {
        for (name, v) in [("kappa", kappa), ("gamma1", gamma1), ("gamma2", gamma2)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{name} must be finite and non-negative, got {v}")));
            }
        }
        Ok(Self { kappa, gamma1, gamma2 })
    }

    pub fn none() -> Self {
        Self { kappa: 0.0, gamma1: 0.0, gamma2: 0.0 }
    }

    /// Smallest nonzero rate.
    pub fn min_rate(&self) -> Option<f64> {
        [self.kappa, self.gamma1, self.gamma2]
            .into_iter()
            .filter(|r| *r > 0.0)
            .reduce(f64::min)
    }
}

/// Dissipation channel.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Channel {
    /// `|g⟩ → |μ⟩` emission, through `|μ⟩⟨g| + |g⟩⟨μ|`.
    Gamma1,
    /// `|e⟩ → |g⟩` emission, through `|g⟩⟨e| + |e⟩⟨g|`.
    Gamma2,
    /// Cavity loss, through `a + a†`.
    Kappa,
}

/// One Lindblad rate `Γ_{j j'}` for the jump `|ξ_j⟩ → |ξ_{j'}⟩`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rate {
    pub from: usize,
    pub to: usize,
    pub channel: Channel,
    pub rate: f64,
}

/// `X⁺`: the `j' < j` part of `a + a†` in an ascending eigenbasis.
#[derive(Clone, Debug)]
pub struct XPlus {
    pub op: Operator,
    /// Pairs with a nonzero element whose energies differ by less than
    /// [`DEGENERACY_TOL`]; their direction follows index order.
    pub degenerate_pairs: Vec<(usize, usize)>,
}

fn upper_part(x: &Array2<C64>, energies: &[f64]) -> (Array2<C64>, Vec<(usize, usize)>) {
    let m = energies.len();
    let mut xp = Array2::zeros((m, m));
    let mut degenerate = Vec::new();
    for j in 0..m {
        for jp in 0..j {
            let v = x[[jp, j]];
            xp[[jp, j]] = v;
            if v.norm() > 0.0 && (energies[j] - energies[jp]).abs() < DEGENERACY_TOL {
                degenerate.push((jp, j));
            }
        }
    }
    (xp, degenerate)
}

fn project(vecs: &Array2<C64>, op: &Operator) -> Array2<C64> {
    let adj = vecs.t().mapv(|z| z.conj());
    adj.dot(&op.matrix().dot(vecs))
}

/// `X⁺` from an ascending eigensystem of `H_0` on `cfg`.
pub fn build_xplus(eig: &EigenSystem, cfg: &HilbertConfig) -> Result<XPlus> {
    if eig.vectors.nrows() != cfg.dim() {
        return Err(Error::Config(format!(
            "eigenvectors have dimension {}, config {}",
            eig.vectors.nrows(),
            cfg.dim()
        )));
    }
    if eig.values.windows(2).into_iter().any(|w| w[1] < w[0]) {
        return Err(Error::Contract("eigenvalues must be ascending".into()));
    }
    let x = project(&eig.vectors, &quadrature(cfg));
    let (xp, degenerate_pairs) = upper_part(&x, eig.values.as_slice().expect("contiguous"));
    Ok(XPlus { op: Operator::from_matrix(xp)?, degenerate_pairs })
}

/// The lowest `M` eigenstates of `H_0` and projected operators.
#[derive(Clone, Debug)]
pub struct DressedSubspace {
    energies: Vec<f64>,
    tags: Vec<StateTag>,
    x: Array2<C64>,
    drive: Array2<C64>,
    sigma_x: Array2<C64>,
    xplus: Array2<C64>,
    degenerate_pairs: Vec<(usize, usize)>,
}

impl DressedSubspace {
    fn assemble(
        energies: Vec<f64>,
        tags: Vec<StateTag>,
        x: Array2<C64>,
        drive: Array2<C64>,
        sigma_x: Array2<C64>,
    ) -> Self {
        let (xplus, degenerate_pairs) = upper_part(&x, &energies);
        Self { energies, tags, x, drive, sigma_x, xplus, degenerate_pairs }
    }

    /// Builds the subspace from the parity chains of `H_R` and the bare
    /// `|μ_n⟩` ladder. `p` must carry `ω_μ`.
    pub fn from_model(p: &ModelParams, n_fock: usize, m: usize) -> Result<Self> {
        let spectrum = RabiSpectrum::compute(p, n_fock, m)?;
        Self::from_spectrum(&spectrum, m)
    }

    /// As [`DressedSubspace::from_model`], reusing a computed spectrum that
    /// holds at least `m` states per parity.
    pub fn from_spectrum(spectrum: &RabiSpectrum, m: usize) -> Result<Self> {
        let p = spectrum.params();
        let omega_mu = p
            .omega_mu()
            .ok_or_else(|| Error::Config("dressed subspace needs omega_mu".into()))?;
        let n_fock = spectrum.n_fock();
        if m == 0 || m > 3 * n_fock {
            return Err(Error::Config(format!("M = {m} outside 1..={}", 3 * n_fock)));
        }
        enum Src<'a> {
            Mu(usize),
            Rabi(&'a crate::rabi::RabiState),
        }
        let mut rabi: Vec<(f64, StateTag, Src)> = Vec::new();
        let mut ranks = [0usize; 2];
        for s in spectrum.states() {
            let slot = match s.parity {
                Parity::Even => 0,
                Parity::Odd => 1,
            };
            rabi.push((s.energy, StateTag::Rabi { parity: s.parity, rank: ranks[slot] }, Src::Rabi(s)));
            ranks[slot] += 1;
        }
        // Merge with the bare ladder, keeping the spectrum's own tie order.
        let mut entries: Vec<(f64, StateTag, Src)> = Vec::with_capacity(m + rabi.len());
        let mut rabi = rabi.into_iter().peekable();
        let mut n = 0usize;
        while entries.len() < m + spectrum.len() {
            let mu_energy = if n < n_fock.min(m) { Some(omega_mu + p.omega() * n as f64) } else { None };
            match (mu_energy, rabi.peek()) {
                (Some(e), Some(r)) if e <= r.0 => {
                    entries.push((e, StateTag::Mu(n), Src::Mu(n)));
                    n += 1;
                }
                (_, Some(_)) => entries.push(rabi.next().expect("peeked")),
                (Some(e), None) => {
                    entries.push((e, StateTag::Mu(n), Src::Mu(n)));
                    n += 1;
                }
                (None, None) => break,
            }
        }
        if entries.len() < m {
            return Err(Error::Config(format!("only {} states available for M = {m}", entries.len())));
        }
        // Every retained chain state must precede the first uncomputed one.
        for parity in [Parity::Even, Parity::Odd] {
            let computed = spectrum.states().iter().filter(|s| s.parity == parity).count();
            let used = entries[..m]
                .iter()
                .filter(|e| matches!(e.1, StateTag::Rabi { parity: q, .. } if q == parity))
                .count();
            if used == computed && computed < n_fock {
                let last = spectrum.states().iter().filter(|s| s.parity == parity).next_back();
                let edge = entries[m - 1].0;
                if last.is_some_and(|s| s.energy < edge) {
                    return Err(Error::Config(format!(
                        "M = {m} needs more than {computed} {parity:?} states"
                    )));
                }
            }
        }
        entries.truncate(m);

        let mut x = Array2::<C64>::zeros((m, m));
        let mut drive = Array2::<C64>::zeros((m, m));
        let mut sigma_x = Array2::<C64>::zeros((m, m));
        let re = |v: f64| C64::new(v, 0.0);
        for a in 0..m {
            for b in a + 1..m {
                let (xv, dv, sv) = match (&entries[a].2, &entries[b].2) {
                    (Src::Mu(i), Src::Mu(j)) => {
                        let xv = if i + 1 == *j {
                            (*j as f64).sqrt()
                        } else if j + 1 == *i {
                            (*i as f64).sqrt()
                        } else {
                            0.0
                        };
                        (xv, 0.0, 0.0)
                    }
                    (Src::Mu(n), Src::Rabi(s)) | (Src::Rabi(s), Src::Mu(n)) => {
                        (0.0, s.amplitude(Level::G, *n), 0.0)
                    }
                    (Src::Rabi(u), Src::Rabi(v)) => (quadrature_element(u, v), 0.0, sigma_x_element(u, v)),
                };
                for (mat, val) in [(&mut x, xv), (&mut drive, dv), (&mut sigma_x, sv)] {
                    mat[[a, b]] = re(val);
                    mat[[b, a]] = re(val);
                }
            }
        }
        let energies = entries.iter().map(|e| e.0).collect();
        let tags = entries.iter().map(|e| e.1).collect();
        Ok(Self::assemble(energies, tags, x, drive, sigma_x))
    }

    /// Builds the subspace from a dense ascending eigensystem of `H_0` on a
    /// three-level `cfg`. States are tagged by their `|μ⟩` content and parity.
    pub fn from_eigensystem(eig: &EigenSystem, cfg: &HilbertConfig, m: usize) -> Result<Self> {
        if cfg.atom_dim() != 3 {
            return Err(Error::Config("dressed subspace needs a three-level atom".into()));
        }
        if eig.vectors.nrows() != cfg.dim() {
            return Err(Error::Config("eigensystem does not match config".into()));
        }
        if m == 0 || m > eig.len() {
            return Err(Error::Config(format!("M = {m} outside 1..={}", eig.len())));
        }
        if eig.values.windows(2).into_iter().any(|w| w[1] < w[0]) {
            return Err(Error::Contract("eigenvalues must be ascending".into()));
        }
        let vecs = eig.vectors.slice(ndarray::s![.., ..m]).to_owned();
        let n_fock = cfg.n_fock();
        let mut tags = Vec::with_capacity(m);
        let mut ranks = [0usize; 2];
        for j in 0..m {
            let v = vecs.column(j);
            let mu_weight: f64 = (0..n_fock).map(|n| v[cfg.index(Level::Mu, n).unwrap()].norm_sqr()).sum();
            let tag = if mu_weight > 1.0 - 1e-10 {
                let (n, _) = (0..n_fock)
                    .map(|n| (n, v[cfg.index(Level::Mu, n).unwrap()].norm_sqr()))
                    .fold((0, -1.0), |b, c| if c.1 > b.1 { c } else { b });
                StateTag::Mu(n)
            } else if mu_weight < 1e-10 {
                let mut parity = 0.0;
                for n in 0..n_fock {
                    for (level, flip) in [(Level::G, 0), (Level::E, 1)] {
                        let w = v[cfg.index(level, n).unwrap()].norm_sqr();
                        parity += if (n + flip) % 2 == 0 { w } else { -w };
                    }
                }
                if parity.abs() > 1.0 - 1e-8 {
                    let (parity, slot) = if parity > 0.0 { (Parity::Even, 0) } else { (Parity::Odd, 1) };
                    let tag = StateTag::Rabi { parity, rank: ranks[slot] };
                    ranks[slot] += 1;
                    tag
                } else {
                    StateTag::Other
                }
            } else {
                StateTag::Other
            };
            tags.push(tag);
        }
        let x = project(&vecs, &quadrature(cfg));
        let drive_op = &atomic_outer(cfg, Level::Mu, Level::G)? + &atomic_outer(cfg, Level::G, Level::Mu)?;
        let sx_op = &atomic_outer(cfg, Level::G, Level::E)? + &atomic_outer(cfg, Level::E, Level::G)?;
        let drive = project(&vecs, &drive_op);
        let sigma_x = project(&vecs, &sx_op);
        let energies = eig.values.iter().take(m).copied().collect();
        Ok(Self::assemble(energies, tags, x, drive, sigma_x))
    }

    pub fn m(&self) -> usize {
        self.energies.len()
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn tags(&self) -> &[StateTag] {
        &self.tags
    }

    /// `a + a†` in the dressed basis.
    pub fn quadrature(&self) -> &Array2<C64> {
        &self.x
    }

    /// `|μ⟩⟨g| + |g⟩⟨μ|` in the dressed basis.
    pub fn drive_coupling(&self) -> &Array2<C64> {
        &self.drive
    }

    /// `|g⟩⟨e| + |e⟩⟨g|` in the dressed basis.
    pub fn sigma_x(&self) -> &Array2<C64> {
        &self.sigma_x
    }

    pub fn xplus(&self) -> &Array2<C64> {
        &self.xplus
    }

    /// `X⁻X⁺`.
    pub fn emission_number(&self) -> Array2<C64> {
        self.xplus.t().mapv(|z| z.conj()).dot(&self.xplus)
    }

    pub fn degenerate_pairs(&self) -> &[(usize, usize)] {
        &self.degenerate_pairs
    }

    /// Position of `tag` in the retained window.
    pub fn index_of(&self, tag: StateTag) -> Result<usize> {
        self.tags
            .iter()
            .position(|t| *t == tag)
            .ok_or_else(|| Error::Config(format!("state {tag} lies outside the retained window of M = {}", self.m())))
    }

    /// Fails unless every tag is retained.
    pub fn require(&self, tags: &[StateTag]) -> Result<Vec<usize>> {
        tags.iter().map(|t| self.index_of(*t)).collect()
    }

    /// Diagonal projected `H_0`.
    pub fn h0(&self) -> Operator {
        Operator::diagonal(&self.energies)
    }

    /// Lindblad rates for all `j' < j` with nonzero matrix elements.
    pub fn lindblad_rates(&self, diss: &DissipationParams) -> Vec<Rate> {
        let mut out = Vec::new();
        for j in 0..self.m() {
            for jp in 0..j {
                for (channel, strength, mat) in [
                    (Channel::Gamma1, diss.gamma1, &self.drive),
                    (Channel::Gamma2, diss.gamma2, &self.sigma_x),
                    (Channel::Kappa, diss.kappa, &self.x),
                ] {
                    let rate = strength * mat[[jp, j]].norm_sqr();
                    if rate > 0.0 {
                        out.push(Rate { from: j, to: jp, channel, rate });
                    }
                }
            }
        }
        out
    }
}

/// Free-function form of [`DressedSubspace::lindblad_rates`].
pub fn lindblad_rates(sub: &DressedSubspace, diss: &DissipationParams) -> Vec<Rate> {
    sub.lindblad_rates(diss)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::herm_eig;
    use crate::rabi::build_h0;
    use approx::assert_abs_diff_eq;

    fn dense(gc: f64, ratio: f64, n: usize) -> (HilbertConfig, EigenSystem, ModelParams) {
        let p = ModelParams::from_gc(gc, ratio).unwrap().with_omega_mu(-4.3).unwrap();
        let cfg = HilbertConfig::three_level(n).unwrap();
        let eig = herm_eig(&build_h0(&p, &cfg).unwrap()).unwrap();
        (cfg, eig, p)
    }

    #[test]
    fn xplus_is_strictly_upper() {
        let (cfg, eig, _) = dense(0.7, 20.0, 16);
        let xp = build_xplus(&eig, &cfg).unwrap();
        for j in 0..cfg.dim() {
            for jp in j..cfg.dim() {
                assert_eq!(xp.op.get(jp, j), C64::new(0.0, 0.0));
            }
        }
    }

    fn bare_g(n: usize) -> StateTag {
        let parity = if n % 2 == 0 { Parity::Even } else { Parity::Odd };
        StateTag::Rabi { parity, rank: n / 2 }
    }

    #[test]
    fn decoupled_xplus_is_bare_annihilation() {
        let (cfg, eig, p) = dense(0.0, 20.0, 10);
        let full = DressedSubspace::from_eigensystem(&eig, &cfg, cfg.dim()).unwrap();
        let chain = DressedSubspace::from_model(&p, 10, 16).unwrap();
        for sub in [&full, &chain] {
            for n in 1..6 {
                let a = sub.index_of(bare_g(n)).unwrap();
                let b = sub.index_of(bare_g(n - 1)).unwrap();
                assert_abs_diff_eq!(sub.xplus()[[b, a]].norm(), (n as f64).sqrt(), epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn chain_subspace_matches_dense() {
        let (cfg, eig, p) = dense(0.9, 30.0, 40);
        let m = 24;
        let full = DressedSubspace::from_eigensystem(&eig, &cfg, m).unwrap();
        let chain = DressedSubspace::from_model(&p, 40, m).unwrap();
        assert_eq!(full.tags(), chain.tags());
        for j in 0..m {
            assert_abs_diff_eq!(full.energies()[j], chain.energies()[j], epsilon = 1e-9);
        }
        let nn_full = full.emission_number();
        let nn_chain = chain.emission_number();
        for a in 0..m {
            // Only diagonal elements are phase independent.
            assert_abs_diff_eq!(nn_full[[a, a]].re, nn_chain[[a, a]].re, epsilon = 1e-8);
        }
        let rf = full.lindblad_rates(&DissipationParams::new(0.01, 0.02, 0.03).unwrap());
        let rc = chain.lindblad_rates(&DissipationParams::new(0.01, 0.02, 0.03).unwrap());
        let total = |r: &[Rate]| r.iter().map(|x| x.rate).sum::<f64>();
        assert_abs_diff_eq!(total(&rf), total(&rc), epsilon = 1e-9);
    }

    #[test]
    fn mu_sector_counts_real_photons() {
        let p = ModelParams::from_gc(0.99, 1e4).unwrap().with_omega_mu(-5.0).unwrap();
        let sub = DressedSubspace::from_model(&p, 200, 40).unwrap();
        let nn = sub.emission_number();
        for n in 0..6 {
            let i = sub.index_of(StateTag::Mu(n)).unwrap();
            for k in 0..sub.m() {
                let want = if k == i { n as f64 } else { 0.0 };
                assert_abs_diff_eq!(nn[[k, i]].re, want, epsilon = 1e-10);
            }
        }
        assert!(sub.index_of(StateTag::Mu(500)).is_err());
    }

    #[test]
    fn rates_lower_energy_and_bare_cavity_loss() {
        let (cfg, eig, _) = dense(0.0, 20.0, 10);
        let sub = DressedSubspace::from_eigensystem(&eig, &cfg, cfg.dim()).unwrap();
        let rates = sub.lindblad_rates(&DissipationParams::new(0.5, 0.0, 0.0).unwrap());
        for r in &rates {
            assert!(sub.energies()[r.to] <= sub.energies()[r.from] + DEGENERACY_TOL);
            assert!(r.rate >= 0.0);
        }
        let g3 = sub.index_of(bare_g(3)).unwrap();
        let from_g3: f64 = rates
            .iter()
            .filter(|r| r.from == g3 && !matches!(sub.tags()[r.to], StateTag::Mu(_)))
            .map(|r| r.rate)
            .sum();
        assert_abs_diff_eq!(from_g3, 0.5 * 3.0, epsilon = 1e-12);
    }
}

// Copyright 2026 The rabi-qpt Authors
// SPDX-License-Identifier: Apache-2.0

//! Dense operators on the truncated atom ⊗ cavity Hilbert space.
//!
//! Basis ordering is atomic index major, Fock index minor: the state
//! `|atom⟩ ⊗ |n⟩` sits at `atom * n_fock + n`. Three-level atoms use
//! `(μ, g, e) = (0, 1, 2)`; two-level atoms use `(g, e) = (0, 1)`.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Sub};

use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::linalg::mat_exp;

/// Truncated Hilbert space layout.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct HilbertConfig {
    n_fock: usize,
    atom_dim: usize,
}

impl HilbertConfig {
    pub fn new(n_fock: usize, atom_dim: usize) -> Result<Self> {
        if n_fock < 2 {
            return Err(Error::Config(format!("n_fock must be at least 2, got {n_fock}")));
        }
        if !(2..=3).contains(&atom_dim) {
            return Err(Error::Config(format!("atom_dim must be 2 or 3, got {atom_dim}")));
        }
        Ok(Self { n_fock, atom_dim })
    }

    pub fn two_level(n_fock: usize) -> Result<Self> {
        Self::new(n_fock, 2)
    }

    pub fn three_level(n_fock: usize) -> Result<Self> {
        Self::new(n_fock, 3)
    }

    pub fn n_fock(&self) -> usize {
        self.n_fock
    }

    pub fn atom_dim(&self) -> usize {
        self.atom_dim
    }

    pub fn dim(&self) -> usize {
        self.n_fock * self.atom_dim
    }

    /// Atomic basis index of `level`, or `None` when the level is absent.
    pub fn level_index(&self, level: Level) -> Option<usize> {
        match (self.atom_dim, level) {
            (3, Level::Mu) => Some(0),
            (3, Level::G) => Some(1),
            (3, Level::E) => Some(2),
            (2, Level::G) => Some(0),
            (2, Level::E) => Some(1),
            _ => None,
        }
    }

    /// Flat index of `|level⟩ ⊗ |n⟩`.
    pub fn index(&self, level: Level, n: usize) -> Option<usize> {
        if n >= self.n_fock {
            return None;
        }
        self.level_index(level).map(|a| a * self.n_fock + n)
    }

    /// Basis vector `|level⟩ ⊗ |n⟩`.
    pub fn basis_state(&self, level: Level, n: usize) -> Result<Array1<C64>> {
        let idx = self.index(level, n).ok_or_else(|| {
            Error::Config(format!("state |{level}⟩|{n}⟩ is outside {self:?}"))
        })?;
        let mut v = Array1::zeros(self.dim());
        v[idx] = C64::new(1.0, 0.0);
        Ok(v)
    }
}

/// Atomic levels.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Level {
    Mu,
    G,
    E,
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Level::Mu => write!(f, "μ"),
            Level::G => write!(f, "g"),
            Level::E => write!(f, "e"),
        }
    }
}

/// Dense complex matrix acting on a [`HilbertConfig`] space.
#[derive(Clone, Debug, PartialEq)]
pub struct Operator {
    mat: Array2<C64>,
}

impl Operator {
    pub fn from_matrix(mat: Array2<C64>) -> Result<Self> {
        if mat.nrows() != mat.ncols() {
            return Err(Error::Config(format!(
                "operator must be square, got {}x{}",
                mat.nrows(),
                mat.ncols()
            )));
        }
        Ok(Self { mat })
    }

    pub fn from_real(mat: &Array2<f64>) -> Result<Self> {
        Self::from_matrix(mat.mapv(|x| C64::new(x, 0.0)))
    }

    pub fn zeros(dim: usize) -> Self {
        Self { mat: Array2::zeros((dim, dim)) }
    }

    pub fn identity(dim: usize) -> Self {
        Self { mat: Array2::eye(dim) }
    }

    pub fn diagonal(values: &[f64]) -> Self {
        let mut op = Self::zeros(values.len());
        for (i, &v) in values.iter().enumerate() {
            op.mat[[i, i]] = C64::new(v, 0.0);
        }
        op
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &Array2<C64> {
        &self.mat
    }

    pub fn into_matrix(self) -> Array2<C64> {
        self.mat
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.mat[[row, col]]
    }

    pub fn dagger(&self) -> Self {
        Self { mat: self.mat.t().mapv(|z| z.conj()) }
    }

    pub fn scale(&self, s: C64) -> Self {
        Self { mat: &self.mat * s }
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.scale(C64::new(s, 0.0))
    }

    pub fn commutator(&self, other: &Operator) -> Self {
        &(self * other) - &(other * self)
    }

    /// Kronecker product `self ⊗ other`.
    pub fn kron(&self, other: &Operator) -> Self {
        let (n, m) = (self.dim(), other.dim());
        let mut out = Array2::zeros((n * m, n * m));
        for i in 0..n {
            for j in 0..n {
                let a = self.mat[[i, j]];
                if a == C64::new(0.0, 0.0) {
                    continue;
                }
                for k in 0..m {
                    for l in 0..m {
                        out[[i * m + k, j * m + l]] = a * other.mat[[k, l]];
                    }
                }
            }
        }
        Self { mat: out }
    }

    pub fn apply(&self, v: &Array1<C64>) -> Array1<C64> {
        self.mat.dot(v)
    }

    /// `⟨u|A|v⟩`.
    pub fn expectation_between(&self, u: &Array1<C64>, v: &Array1<C64>) -> C64 {
        u.iter().zip(self.apply(v).iter()).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.mat.iter().fold(0.0, |m, z| m.max(z.norm()))
    }

    /// Largest entrywise deviation from Hermiticity.
    pub fn hermiticity_defect(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self.mat[[i, j]] - self.mat[[j, i]].conj()).norm());
            }
        }
        worst
    }

    /// `max|A − A†| < 1e-12 · max|A|`.
    pub fn is_hermitian(&self) -> bool {
        let scale = self.max_abs();
        self.hermiticity_defect() <= 1e-12 * scale.max(f64::MIN_POSITIVE)
    }

    pub fn is_finite(&self) -> bool {
        self.mat.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.mat.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }
}

impl Add for &Operator {
    type Output = Operator;
    fn add(self, rhs: &Operator) -> Operator {
        Operator { mat: &self.mat + &rhs.mat }
    }
}

impl Sub for &Operator {
    type Output = Operator;
    fn sub(self, rhs: &Operator) -> Operator {
        Operator { mat: &self.mat - &rhs.mat }
    }
}

impl Mul for &Operator {
    type Output = Operator;
    fn mul(self, rhs: &Operator) -> Operator {
        Operator { mat: self.mat.dot(&rhs.mat) }
    }
}

/// Ladder operators acting on the Fock factor only.
pub fn fock_ladder(n_fock: usize) -> Operator {
    let mut a = Operator::zeros(n_fock);
    for n in 1..n_fock {
        a.mat[[n - 1, n]] = C64::new((n as f64).sqrt(), 0.0);
    }
    a
}

/// The cavity triple `(a, a†, a†a)` on the full space of `cfg`.
#[derive(Clone, Debug)]
pub struct FockOps {
    pub a: Operator,
    pub a_dag: Operator,
    pub n_op: Operator,
}

pub fn fock_ops(cfg: &HilbertConfig) -> FockOps {
    let id_atom = Operator::identity(cfg.atom_dim());
    let a = id_atom.kron(&fock_ladder(cfg.n_fock()));
    let a_dag = a.dagger();
    let n_op = &a_dag * &a;
    FockOps { a, a_dag, n_op }
}

/// `a + a†` on the full space.
pub fn quadrature(cfg: &HilbertConfig) -> Operator {
    let ops = fock_ops(cfg);
    &ops.a + &ops.a_dag
}

/// `|ket⟩⟨bra| ⊗ I_fock`.
pub fn atomic_outer(cfg: &HilbertConfig, ket: Level, bra: Level) -> Result<Operator> {
    let (Some(i), Some(j)) = (cfg.level_index(ket), cfg.level_index(bra)) else {
        return Err(Error::Lookup(format!("|{ket}⟩⟨{bra}|")));
    };
    let mut atom = Operator::zeros(cfg.atom_dim());
    atom.mat[[i, j]] = C64::new(1.0, 0.0);
    Ok(atom.kron(&Operator::identity(cfg.n_fock())))
}

/// Labelled atomic projectors and transition operators, each tensored with
/// the Fock identity.
#[derive(Clone, Debug)]
pub struct AtomicOps {
    ops: BTreeMap<(Level, Level), Operator>,
}

impl AtomicOps {
    /// `|ket⟩⟨bra|`.
    pub fn get(&self, ket: Level, bra: Level) -> Result<&Operator> {
        self.ops
            .get(&(ket, bra))
            .ok_or_else(|| Error::Lookup(format!("|{ket}⟩⟨{bra}|")))
    }

    /// Looks up labels written as `"g><e"`, `"mu><g"`, ...
    pub fn by_label(&self, label: &str) -> Result<&Operator> {
        let parse = |s: &str| match s.trim() {
            "mu" | "μ" => Some(Level::Mu),
            "g" => Some(Level::G),
            "e" => Some(Level::E),
            _ => None,
        };
        let trimmed = label.trim().trim_start_matches('|').trim_end_matches('|');
        let mut parts = trimmed.split("><");
        match (parts.next().and_then(parse), parts.next().and_then(parse), parts.next()) {
            (Some(k), Some(b), None) => self.get(k, b),
            _ => Err(Error::Lookup(label.to_string())),
        }
    }

    pub fn labels(&self) -> impl Iterator<Item = (Level, Level)> + '_ {
        self.ops.keys().copied()
    }
}

pub fn atomic_ops(cfg: &HilbertConfig) -> Result<AtomicOps> {
    let mut pairs = vec![
        (Level::G, Level::G),
        (Level::E, Level::E),
        (Level::G, Level::E),
        (Level::E, Level::G),
    ];
    if cfg.atom_dim() == 3 {
        pairs.extend([(Level::Mu, Level::Mu), (Level::Mu, Level::G), (Level::G, Level::Mu)]);
    }
    let mut ops = BTreeMap::new();
    for (k, b) in pairs {
        ops.insert((k, b), atomic_outer(cfg, k, b)?);
    }
    Ok(AtomicOps { ops })
}

/// `S(r) = exp[(r/2)(a†² − a²)]` on the Fock factor (dimension `n_fock`).
pub fn squeeze_op(r: f64, cfg: &HilbertConfig) -> Result<Operator> {
    let n = cfg.n_fock() as f64;
    let needed = r.sinh().powi(2) + 10.0 * (2.0 * r).cosh() + 10.0;
    if !r.is_finite() || needed >= n {
        return Err(Error::Truncation(format!(
            "squeeze r = {r} needs n_fock > {needed:.1}, have {}",
            cfg.n_fock()
        )));
    }
    let a = fock_ladder(cfg.n_fock());
    let ad = a.dagger();
    let gen = &(&ad * &ad) - &(&a * &a);
    mat_exp(&gen.scale_real(0.5 * r))
}

/// `D(α) = exp[α(a† − a)]` on the Fock factor, real `α`.
pub fn displace_op(alpha: f64, cfg: &HilbertConfig) -> Result<Operator> {
    let n = cfg.n_fock() as f64;
    let needed = alpha * alpha + 5.0 * alpha.abs();
    if !alpha.is_finite() || needed >= n {
        return Err(Error::Truncation(format!(
            "displacement α = {alpha} needs n_fock > {needed:.1}, have {}",
            cfg.n_fock()
        )));
    }
    let a = fock_ladder(cfg.n_fock());
    let gen = &a.dagger() - &a;
    mat_exp(&gen.scale_real(alpha))
}

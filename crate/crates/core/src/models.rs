//! Translation-invariant nearest-neighbour chain Hamiltonians and their
//! Lieb-Robinson constants.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::lattice::{embed, Chain, Region};
use crate::linalg::{self, CMat};
use crate::ops::{pauli, spin_matrices};
use crate::scalar::{cr, Real, C};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModelKind {
    Aklt,
    Tfim,
    Heisenberg,
}

impl FromStr for ModelKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "aklt" => Ok(ModelKind::Aklt),
            "tfim" | "ising" => Ok(ModelKind::Tfim),
            "heisenberg" => Ok(ModelKind::Heisenberg),
            _ => Err(Error::UnknownModel(s.to_string())),
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModelKind::Aklt => "aklt",
            ModelKind::Tfim => "tfim",
            ModelKind::Heisenberg => "heisenberg",
        })
    }
}

impl ModelKind {
    pub fn local_dim(&self) -> usize {
        match self {
            ModelKind::Tfim => 2,
            ModelKind::Aklt | ModelKind::Heisenberg => 3,
        }
    }

    /// Names of the positional parameters.
    pub fn param_names(&self) -> &'static [&'static str] {
        match self {
            ModelKind::Aklt => &[],
            ModelKind::Tfim => &["g"],
            ModelKind::Heisenberg => &["j"],
        }
    }
}

/// One term H_X; the first listed site is the most significant factor.
#[derive(Clone, Debug)]
pub struct LocalTerm<T: Real> {
    pub sites: Vec<usize>,
    pub matrix: CMat<T>,
}

impl<T: Real> LocalTerm<T> {
    pub fn region(&self, n: usize) -> Region {
        Region::new(n, &self.sites).unwrap()
    }
}

#[derive(Clone, Debug)]
pub struct LocalHamiltonian<T: Real> {
    pub kind: ModelKind,
    pub params: Vec<T>,
    pub chain: Chain,
    /// Terms anchored at site 0.
    pub generators: Vec<LocalTerm<T>>,
    /// All terms, generators translated by x = 0..N.
    pub terms: Vec<LocalTerm<T>>,
    pub translation_covariant: bool,
}

/// P^{S=2} on two spin-1 sites: 1/3 + x/2 + x^2/6 with x = S_1.S_2.
pub fn aklt_bond<T: Real>() -> CMat<T> {
    let x = heisenberg_bond::<T>(3);
    let x2 = linalg::mul(&x, &x);
    let id = linalg::identity::<T>(9);
    CMat::<T>::from_fn(9, 9, |i, j| {
        id[(i, j)] * cr(T::lit(1.0 / 3.0)) + x[(i, j)] * cr(T::lit(0.5)) + x2[(i, j)] * cr(T::lit(1.0 / 6.0))
    })
}

/// S_1.S_2 for two spins of local dimension d.
pub fn heisenberg_bond<T: Real>(d: usize) -> CMat<T> {
    let (sx, sy, sz) = spin_matrices::<T>(d);
    let a = linalg::kron(&sx, &sx);
    let b = linalg::kron(&sy, &sy);
    let c = linalg::kron(&sz, &sz);
    linalg::add(&linalg::add(&a, &b), &c)
}

pub fn build_model<T: Real>(kind: ModelKind, params: &[T], n: usize) -> Result<LocalHamiltonian<T>> {
    if n < 3 {
        return Err(Error::Invalid(format!("need at least 3 sites, got {n}")));
    }
    let d = kind.local_dim();
    let chain = Chain::new(n, d)?;
    let generators = match kind {
        ModelKind::Aklt => {
            if !params.is_empty() {
                return Err(Error::Invalid("aklt takes no parameters".into()));
            }
            vec![LocalTerm { sites: vec![0, 1], matrix: aklt_bond() }]
        }
        ModelKind::Tfim => {
            let g = *params.first().ok_or_else(|| Error::Invalid("tfim needs g".into()))?;
            if params.len() > 1 || !(g >= T::zero()) || !g.is_finite() {
                return Err(Error::Invalid("tfim takes one finite field g >= 0".into()));
            }
            let (x, _, z) = pauli::<T>();
            vec![
                LocalTerm { sites: vec![0, 1], matrix: linalg::scale(&linalg::kron(&z, &z), cr(-T::one())) },
                LocalTerm { sites: vec![0], matrix: linalg::scale(&x, cr(-g)) },
            ]
        }
        ModelKind::Heisenberg => {
            let j = params.first().copied().unwrap_or(T::one());
            if params.len() > 1 || !j.is_finite() {
                return Err(Error::Invalid("heisenberg takes one coupling j".into()));
            }
            vec![LocalTerm { sites: vec![0, 1], matrix: linalg::scale(&heisenberg_bond(3), cr(j)) }]
        }
    };
    let mut terms = Vec::with_capacity(n * generators.len());
    for x in 0..n {
        for g in &generators {
            terms.push(LocalTerm { sites: g.sites.iter().map(|s| (s + x) % n).collect(), matrix: g.matrix.clone() });
        }
    }
    let params = if kind == ModelKind::Heisenberg && params.is_empty() { vec![T::one()] } else { params.to_vec() };
    Ok(LocalHamiltonian { kind, params, chain, generators, terms, translation_covariant: true })
}

impl<T: Real> LocalHamiltonian<T> {
    pub fn n(&self) -> usize {
        self.chain.n
    }

    pub fn d(&self) -> usize {
        self.chain.d
    }

    /// H |psi> in the product basis.
    pub fn apply(&self, psi: &[C<T>]) -> Vec<C<T>> {
        let mut out = vec![crate::scalar::czero(); psi.len()];
        for t in &self.terms {
            let y = crate::lattice::apply_local(&self.chain, &t.matrix, &t.sites, psi);
            out.iter_mut().zip(&y).for_each(|(a, b)| *a = *a + b);
        }
        out
    }

    /// Dense product-basis matrix (small chains only).
    pub fn dense(&self) -> CMat<T> {
        let dim = self.chain.dim();
        let mut h = linalg::zeros(dim, dim);
        for t in &self.terms {
            let e = embed(&self.chain, &t.matrix, &t.sites);
            h = linalg::add(&h, &e);
        }
        h
    }

    pub fn params_string(&self) -> String {
        self.kind
            .param_names()
            .iter()
            .zip(&self.params)
            .map(|(k, v)| format!("{k}={v}"))
            .collect::<Vec<_>>()
            .join(",")
    }
}

/// s = max_x sum_{X containing x} ||H_X|| |X| e^{mu diam X}.
pub fn lr_constants<T: Real>(h: &LocalHamiltonian<T>, mu: T) -> Result<T> {
    if !(mu > T::zero()) {
        return Err(Error::Invalid("mu must be positive".into()));
    }
    let n = h.n();
    let mut per_site = vec![T::zero(); n];
    for t in &h.terms {
        let r = t.region(n);
        let w = linalg::op_norm(&t.matrix)? * T::of(r.len()) * (mu * T::of(r.diam())).exp();
        for &x in r.sites() {
            per_site[x] = per_site[x] + w;
        }
    }
    Ok(per_site.into_iter().fold(T::zero(), |m, x| m.max(x)))
}

/// v_LR = (dE/2 + 2 s)/mu.
pub fn lr_velocity<T: Real>(delta_e: T, s: T, mu: T) -> T {
    (delta_e / T::lit(2.0) + T::lit(2.0) * s) / mu
}

/// Smallest valid tail constant at time T: erfc(T) e^{T^2}.
pub fn tail_constant<T: Real>(t: T) -> T {
    crate::scalar::erfc(t) * (t * t).exp()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LrConstants<T: Real> {
    pub mu: T,
    pub s: T,
    pub v_lr: T,
    pub c: T,
}

impl<T: Real> LrConstants<T> {
    pub fn new(h: &LocalHamiltonian<T>, mu: T, delta_e: T, c: T) -> Result<Self> {
        let s = lr_constants(h, mu)?;
        Ok(LrConstants { mu, s, v_lr: lr_velocity(delta_e, s, mu), c })
    }

    /// c bounds the Gaussian tail at time t.
    pub fn tail_ok(&self, t: T) -> bool {
        self.c >= tail_constant(t)
    }
}

//! Named local operators and operators with explicit support.

use crate::error::{Error, Result};
use crate::lattice::{Chain, Region};
use crate::linalg::{self, CMat};
use crate::scalar::{cr, czero, Real, C};

/// Spin-S matrices (Sx, Sy, Sz) in the basis m = S, S-1, ..., -S.
pub fn spin_matrices<T: Real>(d: usize) -> (CMat<T>, CMat<T>, CMat<T>) {
    let s = (d as f64 - 1.0) / 2.0;
    let m = |i: usize| s - i as f64;
    let mut sp = linalg::zeros::<T>(d, d);
    for i in 1..d {
        // <m+1| S+ |m>
        let mi = m(i);
        sp[(i - 1, i)] = cr(T::lit((s * (s + 1.0) - mi * (mi + 1.0)).sqrt()));
    }
    let sm = linalg::adjoint(&sp);
    let half = cr(T::lit(0.5));
    let sx = CMat::<T>::from_fn(d, d, |i, j| (sp[(i, j)] + sm[(i, j)]) * half);
    let sy = CMat::<T>::from_fn(d, d, |i, j| (sp[(i, j)] - sm[(i, j)]) * C::new(T::zero(), -T::lit(0.5)));
    let sz = CMat::<T>::from_fn(d, d, |i, j| if i == j { cr(T::lit(m(i))) } else { czero() });
    (sx, sy, sz)
}

pub fn pauli<T: Real>() -> (CMat<T>, CMat<T>, CMat<T>) {
    let (sx, sy, sz) = spin_matrices::<T>(2);
    let two = cr(T::lit(2.0));
    (linalg::scale(&sx, two), linalg::scale(&sy, two), linalg::scale(&sz, two))
}

/// Single-site operator by name. For d = 2 `sx, sy, sz` are Pauli matrices,
/// for d > 2 they are spin matrices. `sp`, `sm` are raising/lowering, `id` identity.
pub fn named<T: Real>(name: &str, d: usize) -> Result<CMat<T>> {
    let (x, y, z) = if d == 2 { pauli::<T>() } else { spin_matrices::<T>(d) };
    let plus = {
        let (sx, sy, _) = spin_matrices::<T>(d);
        CMat::<T>::from_fn(d, d, |i, j| sx[(i, j)] + C::new(T::zero(), T::one()) * sy[(i, j)])
    };
    Ok(match name {
        "sx" => x,
        "sy" => y,
        "sz" => z,
        "sp" => plus,
        "sm" => linalg::adjoint(&plus),
        "id" => linalg::identity(d),
        _ => return Err(Error::Invalid(format!("unknown operator `{name}`"))),
    })
}

/// Dense matrix with explicit ordered support. The first listed site is the
/// most significant tensor factor.
#[derive(Clone, Debug)]
pub struct RegionOperator<T: Real> {
    pub chain: Chain,
    pub sites: Vec<usize>,
    pub matrix: CMat<T>,
    pub label: Option<String>,
}

impl<T: Real> RegionOperator<T> {
    pub fn new(chain: Chain, sites: Vec<usize>, matrix: CMat<T>) -> Result<Self> {
        let dk = chain.d.pow(sites.len() as u32);
        if matrix.nrows() != dk || matrix.ncols() != dk {
            return Err(Error::Invalid(format!(
                "matrix is {}x{}, support needs {dk}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let mut s = sites.clone();
        s.sort_unstable();
        s.dedup();
        if s.len() != sites.len() || sites.iter().any(|&x| x >= chain.n) {
            return Err(Error::Invalid(format!("bad support {sites:?}")));
        }
        Ok(RegionOperator { chain, sites, matrix, label: None })
    }

    pub fn with_label(mut self, label: &str) -> Self {
        self.label = Some(label.to_string());
        self
    }

    pub fn region(&self) -> Region {
        Region::new(self.chain.n, &self.sites).unwrap()
    }

    pub fn norm(&self) -> Result<T> {
        linalg::op_norm(&self.matrix)
    }

    pub fn scaled(&self, s: T) -> Self {
        let mut o = self.clone();
        o.matrix = linalg::scale(&self.matrix, cr(s));
        o
    }

    /// Same operator minus `shift` times identity.
    pub fn shifted(&self, shift: C<T>) -> Self {
        let mut o = self.clone();
        for i in 0..o.matrix.nrows() {
            o.matrix[(i, i)] = o.matrix[(i, i)] - shift;
        }
        o
    }

    pub fn apply(&self, psi: &[C<T>]) -> Vec<C<T>> {
        crate::lattice::apply_local(&self.chain, &self.matrix, &self.sites, psi)
    }

    /// Re-express on a larger ordered support that contains this one.
    pub fn extend_to(&self, sites: &[usize]) -> Result<Self> {
        let pos: Vec<usize> = self
            .sites
            .iter()
            .map(|s| sites.iter().position(|t| t == s))
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| Error::Invalid("target support does not contain the operator".into()))?;
        let d = self.chain.d;
        let k = sites.len();
        let dk = d.pow(k as u32);
        let digit = |u: usize, j: usize| (u / d.pow((k - 1 - j) as u32)) % d;
        let sub = |u: usize| pos.iter().fold(0, |acc, &j| acc * d + digit(u, j));
        let rest_eq = |u: usize, v: usize| (0..k).filter(|j| !pos.contains(j)).all(|j| digit(u, j) == digit(v, j));
        let m = CMat::<T>::from_fn(dk, dk, |u, v| if rest_eq(u, v) { self.matrix[(sub(u), sub(v))] } else { czero() });
        RegionOperator::new(self.chain, sites.to_vec(), m)
    }
}

/// Product of named single-site operators, e.g. `sz0*sx1` or `sz` (site 0).
pub fn parse_product<T: Real>(spec: &str, chain: Chain) -> Result<RegionOperator<T>> {
    let mut factors: Vec<(usize, CMat<T>)> = Vec::new();
    for part in spec.split('*') {
        let part = part.trim();
        let split = part.find(|c: char| c.is_ascii_digit()).unwrap_or(part.len());
        let (name, site) = part.split_at(split);
        let site: usize = if site.is_empty() {
            0
        } else {
            site.parse().map_err(|_| Error::Invalid(format!("bad site in `{part}`")))?
        };
        if site >= chain.n {
            return Err(Error::Invalid(format!("site {site} outside chain")));
        }
        if factors.iter().any(|f| f.0 == site) {
            return Err(Error::Invalid(format!("site {site} repeated in `{spec}`")));
        }
        factors.push((site, named::<T>(name, chain.d)?));
    }
    if factors.is_empty() {
        return Err(Error::Invalid("empty operator".into()));
    }
    factors.sort_by_key(|f| f.0);
    let sites: Vec<usize> = factors.iter().map(|f| f.0).collect();
    let m = factors.iter().skip(1).fold(factors[0].1.clone(), |acc, f| linalg::kron(&acc, &f.1));
    Ok(RegionOperator::new(chain, sites, m)?.with_label(spec))
}

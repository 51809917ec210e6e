//! Periodic chain geometry and product-basis bookkeeping.
//!
//! Product states are encoded as base-d integers, site 0 least significant.
//! `T_x` moves the content of site i to site i + x.

use crate::error::{Error, Result};
use crate::linalg::CMat;
use crate::scalar::{czero, Real, C};

pub fn periodic_dist(x: usize, y: usize, n: usize) -> usize {
    let a = if x > y { x - y } else { y - x };
    a.min(n - a)
}

/// Sorted set of sites on a ring of `n` sites.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Region {
    n: usize,
    sites: Vec<usize>,
}

impl Region {
    pub fn new(n: usize, sites: &[usize]) -> Result<Self> {
        if n == 0 {
            return Err(Error::Invalid("empty lattice".into()));
        }
        let mut s: Vec<usize> = sites.to_vec();
        if let Some(&bad) = s.iter().find(|&&x| x >= n) {
            return Err(Error::Invalid(format!("site {bad} outside 0..{n}")));
        }
        s.sort_unstable();
        s.dedup();
        Ok(Region { n, sites: s })
    }

    /// `len` consecutive sites starting at `start`, wrapping around.
    pub fn interval(n: usize, start: usize, len: usize) -> Result<Self> {
        let len = len.min(n);
        let s: Vec<usize> = (0..len).map(|k| (start + k) % n).collect();
        Region::new(n, &s)
    }

    pub fn lattice_size(&self) -> usize {
        self.n
    }

    pub fn sites(&self) -> &[usize] {
        &self.sites
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    pub fn contains(&self, x: usize) -> bool {
        self.sites.binary_search(&x).is_ok()
    }

    pub fn diam(&self) -> usize {
        let mut m = 0;
        for (i, &x) in self.sites.iter().enumerate() {
            for &y in &self.sites[i + 1..] {
                m = m.max(periodic_dist(x, y, self.n));
            }
        }
        m
    }

    pub fn dist_to_site(&self, x: usize) -> usize {
        self.sites.iter().map(|&y| periodic_dist(x, y, self.n)).min().unwrap_or(usize::MAX)
    }

    pub fn dist(&self, other: &Region) -> usize {
        other.sites.iter().map(|&x| self.dist_to_site(x)).min().unwrap_or(usize::MAX)
    }

    pub fn is_disjoint(&self, other: &Region) -> bool {
        !self.sites.iter().any(|&x| other.contains(x))
    }

    /// B_l(X): every site within distance l of X.
    pub fn ball(&self, l: usize) -> Region {
        let s: Vec<usize> = (0..self.n).filter(|&x| self.dist_to_site(x) <= l).collect();
        Region { n: self.n, sites: s }
    }

    pub fn complement(&self) -> Region {
        let s: Vec<usize> = (0..self.n).filter(|&x| !self.contains(x)).collect();
        Region { n: self.n, sites: s }
    }

    pub fn is_contiguous(&self) -> bool {
        if self.sites.len() <= 1 || self.sites.len() == self.n {
            return true;
        }
        let starts = self.sites.iter().filter(|&&x| !self.contains((x + self.n - 1) % self.n)).count();
        starts == 1
    }

    /// Sites listed along the arc, first site first. Errors if not contiguous.
    pub fn arc_order(&self) -> Result<Vec<usize>> {
        if !self.is_contiguous() {
            return Err(Error::Invalid(format!("region {:?} is not contiguous", self.sites)));
        }
        if self.sites.len() == self.n || self.sites.is_empty() {
            return Ok(self.sites.clone());
        }
        let start = *self.sites.iter().find(|&&x| !self.contains((x + self.n - 1) % self.n)).unwrap();
        Ok((0..self.sites.len()).map(|k| (start + k) % self.n).collect())
    }

    pub fn translate(&self, x: usize) -> Region {
        let s: Vec<usize> = self.sites.iter().map(|&y| (y + x) % self.n).collect();
        Region::new(self.n, &s).unwrap()
    }
}

/// Base-d encoding of product states on a ring.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Chain {
    pub n: usize,
    pub d: usize,
}

impl Chain {
    pub fn new(n: usize, d: usize) -> Result<Self> {
        if n == 0 || d < 2 {
            return Err(Error::Invalid(format!("bad chain n={n} d={d}")));
        }
        let bits = (d as f64).log2() * n as f64;
        if bits > 62.0 {
            return Err(Error::Invalid(format!("d^N too large for n={n} d={d}")));
        }
        Ok(Chain { n, d })
    }

    pub fn dim(&self) -> usize {
        self.d.pow(self.n as u32)
    }

    pub fn stride(&self, site: usize) -> usize {
        self.d.pow(site as u32)
    }

    pub fn digit(&self, code: usize, site: usize) -> usize {
        (code / self.stride(site)) % self.d
    }

    pub fn digits(&self, code: usize) -> Vec<usize> {
        (0..self.n).map(|i| self.digit(code, i)).collect()
    }

    pub fn encode(&self, digits: &[usize]) -> usize {
        digits.iter().rev().fold(0, |c, &s| c * self.d + s)
    }

    /// Code of T_x |code>.
    pub fn translate(&self, code: usize, x: usize) -> usize {
        let x = x % self.n;
        if x == 0 {
            return code;
        }
        let hi = self.d.pow((self.n - x) as u32);
        (code % hi) * self.d.pow(x as u32) + code / hi
    }
}

/// Local index of `code` restricted to `sites` (first site most significant).
pub fn local_index(chain: &Chain, code: usize, sites: &[usize]) -> usize {
    sites.iter().fold(0, |u, &s| u * chain.d + chain.digit(code, s))
}

/// Product-basis offsets of every local configuration on `sites`.
pub fn local_offsets(chain: &Chain, sites: &[usize]) -> Vec<usize> {
    let k = sites.len();
    let dk = chain.d.pow(k as u32);
    (0..dk)
        .map(|u| {
            let mut off = 0;
            let mut rem = u;
            for j in (0..k).rev() {
                off += (rem % chain.d) * chain.stride(sites[j]);
                rem /= chain.d;
            }
            off
        })
        .collect()
}

/// out = (op on `sites`, identity elsewhere) psi, in the product basis.
pub fn apply_local<T: Real>(chain: &Chain, op: &CMat<T>, sites: &[usize], psi: &[C<T>]) -> Vec<C<T>> {
    let dk = chain.d.pow(sites.len() as u32);
    assert_eq!(op.nrows(), dk);
    assert_eq!(psi.len(), chain.dim());
    let offs = local_offsets(chain, sites);
    let mut out = vec![czero(); psi.len()];
    for (code, &amp) in psi.iter().enumerate() {
        if amp == czero() {
            continue;
        }
        let u = local_index(chain, code, sites);
        let base = code - offs[u];
        for v in 0..dk {
            let m = op[(v, u)];
            if m != czero() {
                out[base + offs[v]] = out[base + offs[v]] + m * amp;
            }
        }
    }
    out
}

/// Dense product-basis matrix of a local operator (small chains only).
pub fn embed<T: Real>(chain: &Chain, op: &CMat<T>, sites: &[usize]) -> CMat<T> {
    let dim = chain.dim();
    let offs = local_offsets(chain, sites);
    let dk = offs.len();
    let mut m = crate::linalg::zeros(dim, dim);
    for code in 0..dim {
        let u = local_index(chain, code, sites);
        let base = code - offs[u];
        for v in 0..dk {
            m[(base + offs[v], code)] = op[(v, u)];
        }
    }
    m
}

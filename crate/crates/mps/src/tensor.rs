//! Uniform MPS tensors, transfer operators and their fixed points.
//!
//! Bond-space vectors are D x D matrices flattened row-major, x[(i, j)] = x[i * D + j]
//! with i the ket and j the bra index. Right action E(x) = sum_s A^s x A^{s dagger};
//! left vectors are rows y^ with (y|x) = y^ . x.

use quasix_core::linalg::{self, CMat};
use quasix_core::scalar::{cr, czero, Real, C};
use quasix_core::{Error, Result};

#[derive(Clone, Debug)]
pub struct MpsTensor<T: Real> {
    pub d: usize,
    pub bond: usize,
    /// one D x D matrix per physical state
    pub a: Vec<CMat<T>>,
}

impl<T: Real> MpsTensor<T> {
    pub fn new(a: Vec<CMat<T>>) -> Result<Self> {
        let bond = a.first().map(|m| m.nrows()).unwrap_or(0);
        if a.len() < 2 || bond == 0 || a.iter().any(|m| m.nrows() != bond || m.ncols() != bond) {
            return Err(Error::Invalid("MPS tensor needs d >= 2 square matrices of equal size".into()));
        }
        Ok(MpsTensor { d: a.len(), bond, a })
    }

    /// E[(i,j),(k,m)] = sum_s A^s[i,k] conj(A^s[j,m])
    pub fn transfer(&self) -> CMat<T> {
        mixed_transfer(&self.a, &self.a)
    }

    pub fn scaled(&self, s: T) -> Self {
        MpsTensor { d: self.d, bond: self.bond, a: self.a.iter().map(|m| linalg::scale(m, cr(s))).collect() }
    }

    /// Rescales so that the dominant transfer eigenvalue has modulus 1.
    pub fn normalized(&self) -> Result<Self> {
        let vals = linalg::eig(&self.transfer())?.0;
        let lam = vals[0].norm();
        if !(lam > T::zero()) {
            return Err(Error::Numerical("transfer operator is nilpotent".into()));
        }
        Ok(self.scaled(T::one() / lam.sqrt()))
    }

    /// G A G^{-1}
    pub fn gauge(&self, g: &CMat<T>) -> Self {
        let gi = linalg::solve(g, &linalg::identity(self.bond));
        MpsTensor { d: self.d, bond: self.bond, a: self.a.iter().map(|m| linalg::mul(&linalg::mul(g, m), &gi)).collect() }
    }

    /// A^{s_1} ... A^{s_k} for a configuration (first site first).
    pub fn string(&self, config: &[usize]) -> CMat<T> {
        config.iter().fold(linalg::identity(self.bond), |acc, &s| linalg::mul(&acc, &self.a[s]))
    }
}

/// Transfer operator with ket matrices `ket` and bra matrices `bra`.
pub fn mixed_transfer<T: Real>(ket: &[CMat<T>], bra: &[CMat<T>]) -> CMat<T> {
    let dk = ket[0].nrows();
    let db = bra[0].nrows();
    let (dk2, db2) = (ket[0].ncols(), bra[0].ncols());
    CMat::<T>::from_fn(dk * db, dk2 * db2, |r, c| {
        let (i, j) = (r / db, r % db);
        let (k, m) = (c / db2, c % db2);
        ket.iter().zip(bra).fold(czero::<T>(), |s, (x, y)| s + x[(i, k)] * y[(j, m)].conj())
    })
}

/// AKLT tensor in the basis m = +1, 0, -1: sqrt(2/3) s+, -sqrt(1/3) sz, -sqrt(2/3) s-.
pub fn aklt_tensor<T: Real>() -> MpsTensor<T> {
    let a = T::lit((2.0f64 / 3.0).sqrt());
    let b = T::lit((1.0f64 / 3.0).sqrt());
    let m = |v: [T; 4]| CMat::<T>::from_fn(2, 2, |i, j| cr(v[i * 2 + j]));
    let z = T::zero();
    MpsTensor::new(vec![m([z, a, z, z]), m([-b, z, z, b]), m([z, z, -a, z])]).unwrap()
}

#[derive(Clone, Debug)]
pub struct FixedPoints<T: Real> {
    /// left fixed point as a row vector
    pub l: Vec<C<T>>,
    pub r: Vec<C<T>>,
    /// dominant eigenvalue before normalization
    pub lambda: C<T>,
    /// second largest modulus / largest
    pub gap_ratio: T,
}

/// Dominant left and right eigenvectors of E, Hermitian positive, (l|r) = 1.
/// The tensor is expected to be normalized (dominant eigenvalue 1); the raw
/// eigenvalue is returned so callers can rescale.
pub fn transfer_fixed_points<T: Real>(t: &MpsTensor<T>) -> Result<FixedPoints<T>> {
    let e = t.transfer();
    let (vals, vecs) = linalg::eig(&e)?;
    let gap_ratio = if vals.len() > 1 { vals[1].norm() / vals[0].norm() } else { T::zero() };
    if gap_ratio > T::one() - T::lit(1e-9) {
        return Err(Error::Numerical("degenerate dominant transfer eigenvalue".into()));
    }
    let lambda = vals[0];
    let (lv, lvecs) = linalg::eig(&linalg::adjoint(&e))?;
    let li = (0..lv.len())
        .min_by(|&i, &j| (lv[i].conj() - lambda).norm().partial_cmp(&(lv[j].conj() - lambda).norm()).unwrap())
        .unwrap();
    let dd = t.bond;
    let r = hermitian_positive(&linalg::column(&vecs, 0), dd);
    // (l|x) = tr(l x) with l^ = conj of the eigenvector of E^dagger
    let lraw: Vec<C<T>> = linalg::column(&lvecs, li).iter().map(|z| z.conj()).collect();
    let lmat = transpose_vec(&lraw, dd);
    let l = transpose_vec(&hermitian_positive(&lmat, dd), dd);
    let norm = linalg::dot(&l.iter().map(|z| z.conj()).collect::<Vec<_>>(), &r);
    if norm.norm() < T::lit(1e-14) {
        return Err(Error::Numerical("fixed points are orthogonal".into()));
    }
    let sc = T::one() / norm.re.abs().sqrt();
    let sign = if norm.re < T::zero() { -T::one() } else { T::one() };
    let r: Vec<C<T>> = r.iter().map(|z| *z * cr(sc)).collect();
    let l: Vec<C<T>> = l.iter().map(|z| *z * cr(sc * sign)).collect();
    Ok(FixedPoints { l, r, lambda, gap_ratio })
}

/// Rescales the eigenvector of a Hermitian-preserving map into a Hermitian matrix with positive trace.
fn hermitian_positive<T: Real>(v: &[C<T>], dd: usize) -> Vec<C<T>> {
    let tr = (0..dd).fold(czero::<T>(), |s, i| s + v[i * dd + i]);
    let phase = if tr.norm() > T::lit(1e-300) { tr.conj() / cr(tr.norm()) } else { C::new(T::one(), T::zero()) };
    let w: Vec<C<T>> = v.iter().map(|z| *z * phase).collect();
    (0..dd * dd)
        .map(|k| {
            let (i, j) = (k / dd, k % dd);
            (w[i * dd + j] + w[j * dd + i].conj()) * cr(T::lit(0.5))
        })
        .collect()
}

/// x[(i,j)] -> x[(j,i)]
pub fn transpose_vec<T: Real>(v: &[C<T>], dd: usize) -> Vec<C<T>> {
    (0..dd * dd).map(|k| v[(k % dd) * dd + k / dd]).collect()
}

/// Two-site transfer with an operator h (d^2 x d^2, first site most significant)
/// between bra and ket: E_h[(i,j),(k,m)] = sum h[s',s] (A^{s1}A^{s2})[i,k] conj((A^{s1'}A^{s2'})[j,m]).
pub fn operator_transfer<T: Real>(t: &MpsTensor<T>, h: &CMat<T>) -> CMat<T> {
    let d = t.d;
    let pairs: Vec<CMat<T>> = (0..d * d).map(|s| linalg::mul(&t.a[s / d], &t.a[s % d])).collect();
    let dd = t.bond;
    let mut out = linalg::zeros::<T>(dd * dd, dd * dd);
    for s in 0..d * d {
        for sp in 0..d * d {
            let w = h[(sp, s)];
            if w == czero() {
                continue;
            }
            let (x, y) = (&pairs[s], &pairs[sp]);
            for i in 0..dd {
                for j in 0..dd {
                    for k in 0..dd {
                        for m in 0..dd {
                            out[(i * dd + j, k * dd + m)] = out[(i * dd + j, k * dd + m)] + w * x[(i, k)] * y[(j, m)].conj();
                        }
                    }
                }
            }
        }
    }
    out
}

/// One-site transfer with an operator o (d x d): sum o[s',s] A^s x A^{s' dagger}.
pub fn site_operator_transfer<T: Real>(t: &MpsTensor<T>, o: &CMat<T>) -> CMat<T> {
    let d = t.d;
    let bra: Vec<CMat<T>> = (0..d)
        .map(|s| (0..d).fold(linalg::zeros(t.bond, t.bond), |acc, sp| linalg::add(&acc, &linalg::scale(&t.a[sp], o[(sp, s)].conj()))))
        .collect();
    mixed_transfer(&t.a, &bra)
}

/// (l| E_h |r), the energy per bond.
pub fn bond_energy<T: Real>(t: &MpsTensor<T>, fp: &FixedPoints<T>, h: &CMat<T>) -> C<T> {
    let eh = operator_transfer(t, h);
    row_mat_col(&fp.l, &eh, &fp.r)
}

pub fn row_mat_col<T: Real>(l: &[C<T>], m: &CMat<T>, r: &[C<T>]) -> C<T> {
    let mr = linalg::matvec(m, r);
    l.iter().zip(&mr).fold(czero::<T>(), |s, (a, b)| s + *a * *b)
}

pub fn row_mat<T: Real>(l: &[C<T>], m: &CMat<T>) -> Vec<C<T>> {
    (0..m.ncols()).map(|j| (0..m.nrows()).fold(czero::<T>(), |s, i| s + l[i] * m[(i, j)])).collect()
}

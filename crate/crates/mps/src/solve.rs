//! Generalized eigenproblem H v = E N v with a rank-deficient Gram matrix N.

use quasix_core::linalg::{self, CMat};
use quasix_core::scalar::{cr, czero, Real, C};
use quasix_core::{Error, Result};

/// Relative cutoff on N eigenvalues.
pub const RANK_TOL: f64 = 1e-10;
/// Levels closer than this are counted as degenerate.
pub const DEGENERACY_TOL: f64 = 1e-8;
/// Largest tolerated |M - M^dagger|.
pub const HERMITICITY_TOL: f64 = 1e-9;

#[derive(Clone, Debug)]
pub struct ExcitationLevels<T: Real> {
    /// ascending
    pub energies: Vec<T>,
    /// multiplicity of the cluster each energy belongs to
    pub degeneracy: Vec<usize>,
    /// number of retained N directions
    pub rank: usize,
    /// max ||H v - E N v|| over the returned vectors
    pub residual: T,
    pub hermiticity: T,
    /// block tensors of the lowest levels, N-normalized
    pub vectors: Vec<Vec<C<T>>>,
    pub blocks: usize,
}

impl<T: Real> ExcitationLevels<T> {
    pub fn min(&self) -> T {
        self.energies[0]
    }

    /// (energy, multiplicity) per distinct level.
    pub fn levels(&self) -> Vec<(T, usize)> {
        let mut out = Vec::new();
        let mut i = 0;
        while i < self.energies.len() {
            out.push((self.energies[i], self.degeneracy[i]));
            i += self.degeneracy[i];
        }
        out
    }
}

/// Connected components of the nonzero pattern of |a| + |b|.
fn components<T: Real>(a: &CMat<T>, b: &CMat<T>) -> Vec<Vec<usize>> {
    let n = a.nrows();
    let scale = linalg::max_abs(a).max(linalg::max_abs(b));
    let cut = T::lit(1e-14) * scale;
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for j in 0..n {
        for i in 0..j {
            if a[(i, j)].norm() + b[(i, j)].norm() > cut {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                if ri != rj {
                    parent[ri.max(rj)] = ri.min(rj);
                }
            }
        }
    }
    let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for i in 0..n {
        let r = find(&mut parent, i);
        groups.entry(r).or_default().push(i);
    }
    groups.into_values().collect()
}

fn sub_matrix<T: Real>(m: &CMat<T>, idx: &[usize]) -> CMat<T> {
    let h = CMat::<T>::from_fn(idx.len(), idx.len(), |i, j| m[(idx[i], idx[j])]);
    // exact Hermitian part
    CMat::<T>::from_fn(idx.len(), idx.len(), |i, j| (h[(i, j)] + h[(j, i)].conj()) * cr(T::lit(0.5)))
}

/// Projects onto the N eigenspace above rank_tol * max eigenvalue and solves
/// the standard problem there. `keep` bounds the number of returned vectors.
pub fn excitation_energies<T: Real>(n: &CMat<T>, h: &CMat<T>, rank_tol: T, keep: usize) -> Result<ExcitationLevels<T>> {
    let dim = n.nrows();
    if h.nrows() != dim || n.ncols() != dim || h.ncols() != dim {
        return Err(Error::Invalid("norm and Hamiltonian matrices differ in shape".into()));
    }
    let herm = linalg::hermiticity_residual(n).max(linalg::hermiticity_residual(h));
    if herm > T::lit(HERMITICITY_TOL) {
        return Err(Error::Numerical(format!("effective matrices are not Hermitian (residual {:e})", herm.to_f64_lossy())));
    }
    let groups = components(n, h);
    let mut spectra = Vec::with_capacity(groups.len());
    let mut nmax = T::zero();
    for idx in &groups {
        let (vals, vecs) = linalg::eigh(&sub_matrix(n, idx))?;
        nmax = nmax.max(vals.iter().fold(T::zero(), |m, &v| m.max(v)));
        spectra.push((vals, vecs));
    }
    let cut = rank_tol * nmax;
    // (energy, group, column of that group's coefficient matrix)
    let mut found: Vec<(T, usize, usize)> = Vec::new();
    let mut coeffs: Vec<CMat<T>> = Vec::with_capacity(groups.len());
    let mut rank = 0;
    for (gi, (idx, (vals, vecs))) in groups.iter().zip(&spectra).enumerate() {
        let kept: Vec<usize> = (0..vals.len()).filter(|&k| vals[k] > cut).collect();
        rank += kept.len();
        if kept.is_empty() {
            coeffs.push(linalg::zeros(idx.len(), 0));
            continue;
        }
        let w = CMat::<T>::from_fn(idx.len(), kept.len(), |i, k| vecs[(i, kept[k])] * cr(T::one() / vals[kept[k]].sqrt()));
        let hs = sub_matrix(h, idx);
        let heff = linalg::mul_adj_left(&w, &linalg::mul(&hs, &w));
        let heff = CMat::<T>::from_fn(kept.len(), kept.len(), |i, j| (heff[(i, j)] + heff[(j, i)].conj()) * cr(T::lit(0.5)));
        let (ev, evec) = linalg::eigh(&heff)?;
        for (k, &e) in ev.iter().enumerate() {
            found.push((e, gi, k));
        }
        coeffs.push(linalg::mul(&w, &evec));
    }
    if found.is_empty() {
        return Err(Error::Numerical("empty physical subspace".into()));
    }
    found.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let energies: Vec<T> = found.iter().map(|f| f.0).collect();
    let mut degeneracy = vec![1; energies.len()];
    let mut i = 0;
    while i < energies.len() {
        let mut j = i + 1;
        while j < energies.len() && energies[j] - energies[j - 1] < T::lit(DEGENERACY_TOL) {
            j += 1;
        }
        for slot in degeneracy.iter_mut().take(j).skip(i) {
            *slot = j - i;
        }
        i = j;
    }
    let mut vectors = Vec::new();
    let mut residual = T::zero();
    for &(e, gi, k) in found.iter().take(keep) {
        let idx = &groups[gi];
        let mut full = vec![czero::<T>(); dim];
        for (i, &row) in idx.iter().enumerate() {
            full[row] = coeffs[gi][(i, k)];
        }
        let hv = linalg::matvec(h, &full);
        let nv = linalg::matvec(n, &full);
        let r = hv.iter().zip(&nv).map(|(a, b)| (*a - *b * cr(e)).norm_sqr()).fold(T::zero(), |s, x| s + x).sqrt();
        residual = residual.max(r);
        vectors.push(full);
    }
    Ok(ExcitationLevels { energies, degeneracy, rank, residual, hermiticity: herm, vectors, blocks: groups.len() })
}

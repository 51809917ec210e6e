//! Momentum-resolved exact diagonalization on periodic chains.
//!
//! Sector basis: |r,p> = R^{-1/2} sum_{x<R} e^{ipx} T_x |r>, r the smallest code in
//! its orbit, R the orbit period; it exists iff pR = 0 mod 2pi and satisfies
//! T_1 |r,p> = e^{-ip} |r,p>. The momentum superposition
//! Phi_p[O] = N^{-1/2} sum_x e^{ipx} T_x O T_x^dag |Psi_0> has the same eigenvalue.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::lattice::{local_index, local_offsets, Chain, Region};
use crate::linalg::{self, CMat, Csr, LanczosOptions};
use crate::models::LocalHamiltonian;
use crate::ops::RegionOperator;
use crate::scalar::{cis, cr, czero, Real, C};

/// Translation orbits of every product state.
#[derive(Clone, Debug)]
pub struct OrbitTable {
    pub chain: Chain,
    /// orbit id of each code
    pub orbit: Vec<u32>,
    /// j with code = T_j rep
    pub shift: Vec<u8>,
    pub reps: Vec<usize>,
    pub periods: Vec<usize>,
}

impl OrbitTable {
    pub fn new(chain: Chain) -> Result<Self> {
        let dim = chain.dim();
        if dim > u32::MAX as usize || chain.n > u8::MAX as usize {
            return Err(Error::Invalid("chain too large for orbit table".into()));
        }
        let mut orbit = vec![u32::MAX; dim];
        let mut shift = vec![0u8; dim];
        let mut reps = Vec::new();
        let mut periods = Vec::new();
        for code in 0..dim {
            if orbit[code] != u32::MAX {
                continue;
            }
            let id = reps.len() as u32;
            let mut c = code;
            let mut j = 0;
            loop {
                orbit[c] = id;
                shift[c] = j as u8;
                j += 1;
                c = chain.translate(code, j);
                if c == code {
                    break;
                }
            }
            reps.push(code);
            periods.push(j);
        }
        Ok(OrbitTable { chain, orbit, shift, reps, periods })
    }

    pub fn n_orbits(&self) -> usize {
        self.reps.len()
    }
}

/// p = 2 pi k / N
pub fn momentum(k: usize, n: usize) -> f64 {
    2.0 * PI * k as f64 / n as f64
}

/// Grid index of a momentum, any representative modulo 2 pi.
pub fn momentum_index(p: f64, n: usize) -> Result<usize> {
    let x = p * n as f64 / (2.0 * PI);
    let k = x.round();
    if (x - k).abs() > 1e-9 {
        return Err(Error::OffGrid(p, n));
    }
    Ok((k as i64).rem_euclid(n as i64) as usize)
}

#[derive(Clone, Debug)]
pub struct MomentumSector {
    pub k: usize,
    pub n: usize,
    /// orbit ids in this sector, ascending representative
    pub orbits: Vec<usize>,
    pub reps: Vec<usize>,
    pub periods: Vec<usize>,
    /// position of each orbit id in this sector, u32::MAX if absent
    pub pos: Vec<u32>,
}

impl MomentumSector {
    pub fn p(&self) -> f64 {
        momentum(self.k, self.n)
    }

    pub fn dim(&self) -> usize {
        self.reps.len()
    }

    /// Sector coefficients -> product-basis vector.
    pub fn to_product<T: Real>(&self, table: &OrbitTable, coeffs: &[C<T>]) -> Vec<C<T>> {
        let mut v = vec![czero(); table.chain.dim()];
        let p = T::lit(self.p());
        for (i, (&r, &per)) in self.reps.iter().zip(&self.periods).enumerate() {
            let norm = cr(T::one() / T::of(per).sqrt());
            for x in 0..per {
                v[table.chain.translate(r, x)] = coeffs[i] * cis(p * T::of(x)) * norm;
            }
        }
        v
    }

    /// <r,p|phi> for every sector basis state.
    pub fn project<T: Real>(&self, table: &OrbitTable, phi: &[C<T>]) -> Vec<C<T>> {
        let p = T::lit(self.p());
        self.reps
            .iter()
            .zip(&self.periods)
            .map(|(&r, &per)| {
                let s = (0..per).fold(czero::<T>(), |s, x| s + cis(-p * T::of(x)) * phi[table.chain.translate(r, x)]);
                s / cr(T::of(per).sqrt())
            })
            .collect()
    }
}

pub fn momentum_basis(table: &OrbitTable, k: usize) -> Result<MomentumSector> {
    let n = table.chain.n;
    if k >= n {
        return Err(Error::OffGrid(momentum(k, n), n));
    }
    let mut orbits = Vec::new();
    let mut pos = vec![u32::MAX; table.n_orbits()];
    for (id, &per) in table.periods.iter().enumerate() {
        // e^{ipR} = 1  <=>  k R = 0 mod N
        if (k * per) % n == 0 {
            pos[id] = orbits.len() as u32;
            orbits.push(id);
        }
    }
    Ok(MomentumSector {
        k,
        n,
        reps: orbits.iter().map(|&o| table.reps[o]).collect(),
        periods: orbits.iter().map(|&o| table.periods[o]).collect(),
        orbits,
        pos,
    })
}

/// Sector by momentum value; errors off the grid.
pub fn momentum_basis_at(table: &OrbitTable, p: f64) -> Result<MomentumSector> {
    momentum_basis(table, momentum_index(p, table.chain.n)?)
}

/// Sector block of H: M[r', r] = sum_s h_s e^{-ip j_s} sqrt(R_r / R_r').
pub fn sector_hamiltonian<T: Real>(h: &LocalHamiltonian<T>, table: &OrbitTable, sector: &MomentumSector) -> Csr<T> {
    let chain = table.chain;
    let p = T::lit(sector.p());
    let n = chain.n;
    let phases: Vec<C<T>> = (0..n).map(|j| cis(-p * T::of(j))).collect();
    let terms: Vec<(Vec<usize>, &CMat<T>, Vec<usize>)> =
        h.terms.iter().map(|t| (t.sites.clone(), &t.matrix, local_offsets(&chain, &t.sites))).collect();
    let mut rows: Vec<Vec<(usize, C<T>)>> = vec![Vec::new(); sector.dim()];
    for (col, (&r, &per)) in sector.reps.iter().zip(&sector.periods).enumerate() {
        for (sites, mat, offs) in &terms {
            let u = local_index(&chain, r, sites);
            let base = r - offs[u];
            for v in 0..offs.len() {
                let m = mat[(v, u)];
                if m == czero() {
                    continue;
                }
                let s = base + offs[v];
                let oid = table.orbit[s] as usize;
                let row = sector.pos[oid];
                if row == u32::MAX {
                    continue;
                }
                let row = row as usize;
                let amp = m * phases[table.shift[s] as usize] * cr((T::of(per) / T::of(sector.periods[row])).sqrt());
                rows[row].push((col, amp));
            }
        }
    }
    Csr::from_rows(sector.dim(), rows)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolveMode {
    Full,
    LowestK(usize),
}

#[derive(Clone, Debug)]
pub struct EigenSector<T: Real> {
    pub k: usize,
    pub p: f64,
    /// ascending
    pub energies: Vec<T>,
    /// eigenvectors in sector basis, one per column
    pub vectors: CMat<T>,
    pub full: bool,
    pub residuals: Vec<T>,
}

impl<T: Real> EigenSector<T> {
    /// <Psi_{p,alpha}|phi> for all alpha.
    pub fn overlaps(&self, phi: &[C<T>]) -> Vec<C<T>> {
        linalg::adj_matvec(&self.vectors, phi)
    }

    pub fn vector(&self, alpha: usize) -> Vec<C<T>> {
        linalg::column(&self.vectors, alpha)
    }

    /// Minimal distance of E_alpha to the other eigenvalues in this sector.
    pub fn isolation_gap(&self, alpha: usize) -> Option<T> {
        let e = self.energies[alpha];
        self.energies
            .iter()
            .enumerate()
            .filter(|(b, _)| *b != alpha)
            .map(|(_, x)| (*x - e).abs())
            .fold(None, |m: Option<T>, x| Some(m.map_or(x, |m| m.min(x))))
    }

    pub fn shift(&mut self, e0: T) {
        self.energies.iter_mut().for_each(|e| *e = *e - e0);
    }
}

pub fn eigensolve<T: Real>(m: &Csr<T>, k: usize, p: f64, mode: SolveMode, opts: &LanczosOptions) -> Result<EigenSector<T>> {
    match mode {
        SolveMode::Full => {
            let dense = m.to_dense();
            let (vals, vecs) = linalg::eigh(&dense)?;
            let residuals = vec![T::zero(); vals.len()];
            Ok(EigenSector { k, p, energies: vals, vectors: vecs, full: true, residuals })
        }
        SolveMode::LowestK(want) => {
            let dim = m.nrows;
            if dim <= 400 {
                let mut full = eigensolve(m, k, p, SolveMode::Full, opts)?;
                let keep = want.min(dim);
                full.energies.truncate(keep);
                full.vectors = CMat::<T>::from_fn(dim, keep, |i, j| full.vectors[(i, j)]);
                full.residuals.truncate(keep);
                full.full = keep == dim;
                return Ok(full);
            }
            let res = linalg::lanczos_lowest(|x, y| m.matvec(x, y), dim, want, opts)?;
            if !res.converged {
                let worst = res.residuals.iter().fold(T::zero(), |a, b| a.max(*b));
                return Err(Error::Numerical(format!("lanczos not converged in sector k={k}: residual {worst}")));
            }
            let vecs = CMat::<T>::from_fn(dim, res.vectors.len(), |i, j| res.vectors[j][i]);
            Ok(EigenSector { k, p, energies: res.values, vectors: vecs, full: false, residuals: res.residuals })
        }
    }
}

/// Eigendata of every momentum sector with the global ground energy subtracted.
#[derive(Clone, Debug)]
pub struct Spectrum<T: Real> {
    pub table: OrbitTable,
    pub sectors: Vec<MomentumSector>,
    pub eig: Vec<EigenSector<T>>,
    /// ground energy before the shift
    pub raw_ground_energy: T,
    /// ground state as a p = 0 sector vector and in the product basis
    pub ground_sector: Vec<C<T>>,
    pub ground: Vec<C<T>>,
}

impl<T: Real> Spectrum<T> {
    pub fn solve(h: &LocalHamiltonian<T>, mode: SolveMode, opts: &LanczosOptions) -> Result<Self> {
        let table = OrbitTable::new(h.chain)?;
        Self::solve_sectors(h, table, &(0..h.n()).collect::<Vec<_>>(), mode, opts)
    }

    /// Only the listed sectors (k = 0 is always included for the ground state).
    pub fn solve_sectors(
        h: &LocalHamiltonian<T>,
        table: OrbitTable,
        ks: &[usize],
        mode: SolveMode,
        opts: &LanczosOptions,
    ) -> Result<Self> {
        let n = h.n();
        let mut ks: Vec<usize> = ks.to_vec();
        if !ks.contains(&0) {
            ks.push(0);
        }
        ks.sort_unstable();
        ks.dedup();
        let mut sectors = Vec::new();
        let mut eig = Vec::new();
        for &k in &ks {
            let s = momentum_basis(&table, k)?;
            let m = sector_hamiltonian(h, &table, &s);
            eig.push(eigensolve(&m, k, momentum(k, n), mode, opts)?);
            sectors.push(s);
        }
        let (gi, _) = eig
            .iter()
            .enumerate()
            .filter(|(_, e)| !e.energies.is_empty())
            .min_by(|a, b| a.1.energies[0].partial_cmp(&b.1.energies[0]).unwrap())
            .ok_or_else(|| Error::Numerical("empty spectrum".into()))?;
        if eig[gi].k != 0 {
            return Err(Error::Numerical(format!("ground state found at momentum index {}", eig[gi].k)));
        }
        let e0 = eig[gi].energies[0];
        let ground_sector = eig[gi].vector(0);
        let ground = sectors[gi].to_product(&table, &ground_sector);
        for e in eig.iter_mut() {
            e.shift(e0);
        }
        Ok(Spectrum { table, sectors, eig, raw_ground_energy: e0, ground_sector, ground })
    }

    pub fn index_of(&self, k: usize) -> Option<usize> {
        self.eig.iter().position(|e| e.k == k)
    }

    pub fn sector(&self, k: usize) -> Result<(&MomentumSector, &EigenSector<T>)> {
        let i = self.index_of(k).ok_or_else(|| Error::Invalid(format!("sector k={k} not solved")))?;
        Ok((&self.sectors[i], &self.eig[i]))
    }

    /// Spectral gap above the ground state over all solved sectors.
    pub fn gap(&self) -> T {
        let mut g = T::infinity();
        for e in &self.eig {
            for (a, &x) in e.energies.iter().enumerate() {
                if e.k == 0 && a == 0 {
                    continue;
                }
                g = g.min(x);
            }
        }
        g
    }

    /// Ground-state degeneracy check: energies within `tol` of zero besides the ground state.
    pub fn ground_degeneracy(&self, tol: T) -> usize {
        self.eig.iter().map(|e| e.energies.iter().filter(|x| x.abs() <= tol).count()).sum()
    }

    pub fn ground_expectation(&self, op: &RegionOperator<T>) -> C<T> {
        linalg::dot(&self.ground, &op.apply(&self.ground))
    }

    pub fn n(&self) -> usize {
        self.table.chain.n
    }

    /// Phi_p[O] in the sector basis of momentum index k. O is shifted so that
    /// its ground-state expectation vanishes.
    pub fn momentum_state(&self, op: &RegionOperator<T>, k: usize) -> Result<Vec<C<T>>> {
        let (sector, _) = self.sector(k)?;
        let shifted = op.shifted(self.ground_expectation(op));
        Ok(self.momentum_state_raw(&shifted, sector))
    }

    /// Phi_p[O] without the expectation shift.
    pub fn momentum_state_raw(&self, op: &RegionOperator<T>, sector: &MomentumSector) -> Vec<C<T>> {
        let phi = op.apply(&self.ground);
        self.superpose(&phi, sector)
    }

    /// sqrt(N) <r,p|phi> = coefficients of N^{-1/2} sum_x e^{ipx} T_x |phi>.
    pub fn superpose(&self, phi: &[C<T>], sector: &MomentumSector) -> Vec<C<T>> {
        let sn = cr(T::of(self.n()).sqrt());
        sector.project(&self.table, phi).into_iter().map(|c| c * sn).collect()
    }

    /// |T_1 psi0 - psi0|
    pub fn ground_translation_residual(&self) -> T {
        let chain = self.table.chain;
        let mut s = T::zero();
        for (c, &a) in self.ground.iter().enumerate() {
            s = s + (self.ground[chain.translate(c, 1)] - a).norm_sqr();
        }
        s.sqrt()
    }
}

#[derive(Clone, Copy, Debug)]
pub struct BoundCheck<T: Real> {
    pub lhs: T,
    pub rhs: T,
    pub holds: bool,
}

/// ||Phi_p[O]|| against sqrt(diam X + |X|/delta) ||O|| for the shifted operator.
pub fn norm_bound_check<T: Real>(spec: &Spectrum<T>, op: &RegionOperator<T>, k: usize, delta: T) -> Result<BoundCheck<T>> {
    let shifted = op.shifted(spec.ground_expectation(op));
    let (sector, _) = spec.sector(k)?;
    let phi = spec.momentum_state_raw(&shifted, sector);
    let lhs = linalg::norm(&phi);
    let x = op.region();
    let rhs = (T::of(x.diam()) + T::of(x.len()) / delta).sqrt() * shifted.norm()?;
    let tol = T::lit(1e-12) * (T::one() + rhs);
    Ok(BoundCheck { lhs, rhs, holds: lhs <= rhs + tol })
}

/// Normalized partial trace of a product-basis operator onto a contiguous region.
/// The result lists the region's sites along the arc.
pub fn partial_trace_localize<T: Real>(full: &CMat<T>, chain: Chain, region: &Region) -> Result<RegionOperator<T>> {
    if full.nrows() != chain.dim() || full.ncols() != chain.dim() {
        return Err(Error::Invalid("operator does not act on the full chain".into()));
    }
    let keep = region.arc_order()?;
    let env: Vec<usize> = region.complement().sites().to_vec();
    let ko = local_offsets(&chain, &keep);
    let eo = local_offsets(&chain, &env);
    let norm = T::one() / T::of(eo.len());
    let m = CMat::<T>::from_fn(ko.len(), ko.len(), |u, v| {
        let s = eo.iter().fold(czero::<T>(), |s, &c| s + full[(ko[u] + c, ko[v] + c)]);
        s * cr(norm)
    });
    RegionOperator::new(chain, keep, m)
}

/// Full product-basis eigendecomposition, for dynamics on small chains.
#[derive(Clone, Debug)]
pub struct DenseEigen<T: Real> {
    pub chain: Chain,
    pub values: Vec<T>,
    pub vectors: CMat<T>,
}

impl<T: Real> DenseEigen<T> {
    pub fn new(h: &LocalHamiltonian<T>) -> Result<Self> {
        let (values, vectors) = linalg::eigh(&h.dense())?;
        Ok(DenseEigen { chain: h.chain, values, vectors })
    }

    /// e^{iHt} A e^{-iHt} in the product basis.
    pub fn heisenberg(&self, a: &CMat<T>, t: T) -> CMat<T> {
        let ae = linalg::mul_adj_left(&self.vectors, &linalg::mul(a, &self.vectors));
        let ph: Vec<C<T>> = self.values.iter().map(|&e| cis(e * t)).collect();
        let at = CMat::<T>::from_fn(ae.nrows(), ae.ncols(), |m, n| ph[m] * ae[(m, n)] * ph[n].conj());
        linalg::mul_adj_right(&linalg::mul(&self.vectors, &at), &self.vectors)
    }
}

/// ||[e^{iHt} A e^{-iHt}, B]|| against 2||A|| ||B|| |X| e^{-mu dist(X,Y)} (e^{2s|t|} - 1).
pub fn lr_commutator_check<T: Real>(
    a: &RegionOperator<T>,
    b: &RegionOperator<T>,
    t: T,
    dyn_: &DenseEigen<T>,
    mu: T,
    s: T,
) -> Result<BoundCheck<T>> {
    let (x, y) = (a.region(), b.region());
    if !x.is_disjoint(&y) {
        return Err(Error::Invalid("supports overlap".into()));
    }
    let chain = dyn_.chain;
    let af = crate::lattice::embed(&chain, &a.matrix, &a.sites);
    let bf = crate::lattice::embed(&chain, &b.matrix, &b.sites);
    let at = dyn_.heisenberg(&af, t);
    let comm = linalg::sub(&linalg::mul(&at, &bf), &linalg::mul(&bf, &at));
    let lhs = linalg::op_norm(&comm)?;
    let rhs = T::lit(2.0) * a.norm()? * b.norm()? * T::of(x.len()) * (-mu * T::of(x.dist(&y))).exp()
        * ((T::lit(2.0) * s * t.abs()).exp() - T::one());
    let tol = T::lit(1e-10) * (T::one() + a.norm()? * b.norm()?);
    Ok(BoundCheck { lhs, rhs, holds: lhs <= rhs + tol })
}

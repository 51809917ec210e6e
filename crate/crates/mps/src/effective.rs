//! Effective norm and Hamiltonian matrices of the momentum block ansatz
//! Phi_p[B] = sum_n e^{ipn} (... A A B_n A A ...), per unit length.
//!
//! Shifts |n| < l are contracted on a finite window. Shifts n >= l factor as
//! X R_p Y with X, Y block contractions and R_p the regularized resolvent;
//! n <= -l is the adjoint. Blocks are projected onto (l|B|r) = 0 first, which
//! removes every disconnected |r)(l| piece.

use quasix_core::linalg::{self, CMat};
use quasix_core::scalar::{cis, cone, czero, Real, C};
use quasix_core::{Error, Result};

use crate::resolvent::regularized_resolvent;
use crate::tensor::{bond_energy, operator_transfer, row_mat, transfer_fixed_points, FixedPoints, MpsTensor};
use crate::window::{left_env, Contractor};

/// Dense shift matrices are cached below this block dimension.
pub const CACHE_DIM: usize = 1100;

struct HamPieces<T: Real> {
    e_h: CMat<T>,
    l_h: Vec<C<T>>,
    r_h: Vec<C<T>>,
    x_lh: CMat<T>,
    y_rh: CMat<T>,
    /// (phase offset, X) for operators touching the bra block
    x_touch: Vec<(isize, CMat<T>)>,
    /// (phase offset, Y) for operators touching the ket block
    y_touch: Vec<(isize, CMat<T>)>,
}

struct DenseCache<T: Real> {
    k_norm: Vec<CMat<T>>,
    k_ham: Vec<CMat<T>>,
    straddle: Option<CMat<T>>,
}

pub struct BlockModel<T: Real> {
    pub tensor: MpsTensor<T>,
    pub fp: FixedPoints<T>,
    pub ell: usize,
    /// two-site term with the bond energy subtracted
    pub h: Option<CMat<T>>,
    pub bond_energy: T,
    pub transfer: CMat<T>,
    /// ground block G and the overlap functional phi(B) = (l|B|r)
    pub ground: Vec<C<T>>,
    pub phi: Vec<C<T>>,
    con: Contractor<T>,
    x0: CMat<T>,
    y0: CMat<T>,
    ham: Option<HamPieces<T>>,
    cache: Option<DenseCache<T>>,
}

impl<T: Real> BlockModel<T> {
    pub fn new(tensor: &MpsTensor<T>, h: Option<&CMat<T>>, ell: usize) -> Result<Self> {
        if ell == 0 {
            return Err(Error::Invalid("block length must be at least 1".into()));
        }
        let d = tensor.d;
        if let Some(h) = h {
            if h.nrows() != d * d || h.ncols() != d * d {
                return Err(Error::Invalid(format!("two-site term must be {}x{}", d * d, d * d)));
            }
            if linalg::hermiticity_residual(h) > T::lit(1e-12) {
                return Err(Error::Invalid("two-site term is not Hermitian".into()));
            }
        }
        let fp = transfer_fixed_points(tensor)?;
        if (fp.lambda - cone::<T>()).norm() > T::lit(1e-10) {
            return Err(Error::Invalid("tensor is not normalized (dominant transfer eigenvalue != 1)".into()));
        }
        let dd = tensor.bond;
        let (h, e0) = match h {
            Some(h) => {
                let e0 = bond_energy(tensor, &fp, h).re;
                let shifted = linalg::sub(h, &linalg::scale(&linalg::identity(d * d), C::new(e0, T::zero())));
                (Some(shifted), e0)
            }
            None => (None, T::zero()),
        };
        let con = Contractor::new(tensor, ell, h.as_ref(), ell + 1);
        let dim = con.block_dim();
        let transfer = tensor.transfer();
        let yl = left_env(&fp.l, dd);
        let x0 = {
            let mut m = linalg::zeros(dim, dd * dd);
            con.bra_block(0, ell as isize, None, &yl, &mut m);
            m
        };
        let y0 = {
            let mut m = linalg::zeros(dd * dd, dim);
            con.ket_block(0, ell as isize, None, &fp.r, &mut m);
            m
        };
        let phi = row_mat(&fp.l, &y0);
        let ground = con.ground_block();
        let mut model = BlockModel {
            tensor: tensor.clone(),
            fp,
            ell,
            h,
            bond_energy: e0,
            transfer,
            ground,
            phi,
            con,
            x0,
            y0,
            ham: None,
            cache: None,
        };
        if model.h.is_some() {
            model.ham = Some(model.ham_pieces()?);
        }
        if dim <= CACHE_DIM {
            let k_norm = (0..ell).map(|n| model.shift_norm(n)).collect();
            let k_ham = if model.h.is_some() { (0..ell).map(|n| model.shift_ham(n)).collect() } else { Vec::new() };
            let straddle = model.h.as_ref().map(|_| model.straddle());
            model.cache = Some(DenseCache { k_norm, k_ham, straddle });
        }
        Ok(model)
    }

    pub fn dim(&self) -> usize {
        self.con.block_dim()
    }

    pub fn d(&self) -> usize {
        self.tensor.d
    }

    pub fn bond(&self) -> usize {
        self.tensor.bond
    }

    fn ham_pieces(&self) -> Result<HamPieces<T>> {
        let h = self.h.as_ref().unwrap();
        let (ell, dd, dim) = (self.ell as isize, self.bond(), self.dim());
        let e_h = operator_transfer(&self.tensor, h);
        let r0 = regularized_resolvent(&self.transfer, T::zero(), &self.fp.l, &self.fp.r)?;
        let l_h = row_mat(&row_mat(&self.fp.l, &e_h), &r0);
        let r_h = linalg::matvec(&r0, &linalg::matvec(&e_h, &self.fp.r));
        let yl = left_env(&self.fp.l, dd);
        let mut x_lh = linalg::zeros(dim, dd * dd);
        self.con.bra_block(0, ell, None, &left_env(&l_h, dd), &mut x_lh);
        let mut y_rh = linalg::zeros(dd * dd, dim);
        self.con.ket_block(0, ell, None, &r_h, &mut y_rh);
        let mut x_touch = Vec::new();
        let mut y_touch = Vec::new();
        for j in -1..ell {
            let (w0, w1) = (j.min(0), (j + 2).max(ell));
            let mut x = linalg::zeros(dim, dd * dd);
            self.con.bra_block(w0, w1, Some(j), &yl, &mut x);
            x_touch.push((w1, x));
            let mut y = linalg::zeros(dd * dd, dim);
            self.con.ket_block(w0, w1, Some(j), &self.fp.r, &mut y);
            y_touch.push((ell - w0, y));
        }
        Ok(HamPieces { e_h, l_h, r_h, x_lh, y_rh, x_touch, y_touch })
    }

    /// <B'_0|B_n> for 0 <= n < l.
    fn shift_norm(&self, n: usize) -> CMat<T> {
        let dim = self.dim();
        let mut out = linalg::zeros(dim, dim);
        let yl = left_env(&self.fp.l, self.bond());
        let n = n as isize;
        self.con.bilinear(0, n + self.ell as isize, n, None, &yl, &self.fp.r, cone(), &mut out);
        out
    }

    /// <B'_0|H - E_0|B_n> for 0 <= n < l.
    fn shift_ham(&self, n: usize) -> CMat<T> {
        let ham = self.ham.as_ref().unwrap();
        let dim = self.dim();
        let dd = self.bond();
        let mut out = linalg::zeros(dim, dim);
        let yl = left_env(&self.fp.l, dd);
        let n = n as isize;
        let end = n + self.ell as isize;
        // operator entirely left / right of both blocks
        self.con.bilinear(0, end, n, None, &left_env(&ham.l_h, dd), &self.fp.r, cone(), &mut out);
        self.con.bilinear(0, end, n, None, &yl, &ham.r_h, cone(), &mut out);
        // operator touching the union of the blocks
        for j in -1..end {
            self.con.bilinear(j.min(0), (j + 2).max(end), n, Some(j), &yl, &self.fp.r, cone(), &mut out);
        }
        out
    }

    /// Adjacent blocks (n = l) with the operator across their common edge.
    fn straddle(&self) -> CMat<T> {
        let dim = self.dim();
        let ell = self.ell as isize;
        let mut out = linalg::zeros(dim, dim);
        let yl = left_env(&self.fp.l, self.bond());
        self.con.bilinear(0, 2 * ell, ell, Some(ell - 1), &yl, &self.fp.r, cone(), &mut out);
        out
    }

    fn dense_norm(&self, n: usize) -> CMat<T> {
        match &self.cache {
            Some(c) => c.k_norm[n].clone(),
            None => self.shift_norm(n),
        }
    }

    fn dense_ham(&self, n: usize) -> CMat<T> {
        match &self.cache {
            Some(c) => c.k_ham[n].clone(),
            None => self.shift_ham(n),
        }
    }

    fn dense_straddle(&self) -> CMat<T> {
        match &self.cache {
            Some(c) => c.straddle.clone().unwrap(),
            None => self.straddle(),
        }
    }

    /// sum over |n| < l plus the far part M + M^dagger.
    fn combine(&self, p: T, dense: impl Fn(usize) -> CMat<T>, far: CMat<T>) -> CMat<T> {
        let dim = self.dim();
        let mut out = dense(0);
        for n in 1..self.ell {
            let k = dense(n);
            let ph = cis(p * T::of(n));
            for j in 0..dim {
                for i in 0..dim {
                    out[(i, j)] = out[(i, j)] + ph * k[(i, j)] + ph.conj() * k[(j, i)].conj();
                }
            }
        }
        for j in 0..dim {
            for i in 0..dim {
                out[(i, j)] = out[(i, j)] + far[(i, j)] + far[(j, i)].conj();
            }
        }
        out
    }

    /// Unprojected N_p.
    pub fn raw_norm_matrix(&self, p: T) -> Result<CMat<T>> {
        let rp = regularized_resolvent(&self.transfer, p, &self.fp.l, &self.fp.r)?;
        let ell = self.ell as isize;
        let far = linalg::scale(&linalg::mul(&linalg::mul(&self.x0, &rp), &self.y0), phase(p, ell));
        Ok(self.combine(p, |n| self.dense_norm(n), far))
    }

    /// Unprojected H_p split by where the operator sits relative to the two
    /// blocks: shifts |n| < l ("overlap"), and for |n| >= l operators outside
    /// both blocks, strictly between them, touching one block, or across the
    /// common edge of adjacent blocks. Each piece includes its adjoint.
    pub fn hamiltonian_cases(&self, p: T) -> Result<Vec<(&'static str, CMat<T>)>> {
        let ham = self.ham.as_ref().ok_or_else(|| Error::Invalid("model has no Hamiltonian term".into()))?;
        let rp = regularized_resolvent(&self.transfer, p, &self.fp.l, &self.fp.r)?;
        let ell = self.ell as isize;
        let x0r = linalg::mul(&self.x0, &rp);
        let ry0 = linalg::mul(&rp, &self.y0);
        let outside = linalg::add(&linalg::mul(&ham.x_lh, &ry0), &linalg::mul(&x0r, &ham.y_rh));
        let outside = linalg::scale(&outside, phase(p, ell));
        let between = linalg::scale(&linalg::mul(&x0r, &linalg::mul(&ham.e_h, &ry0)), phase(p, ell + 2));
        let mut right = linalg::zeros(self.bond() * self.bond(), self.dim());
        for (off, y) in &ham.y_touch {
            right = linalg::add(&right, &linalg::scale(y, phase(p, *off)));
        }
        let mut left = linalg::zeros(self.dim(), self.bond() * self.bond());
        for (off, x) in &ham.x_touch {
            left = linalg::add(&left, &linalg::scale(x, phase(p, *off)));
        }
        let touching = linalg::add(&linalg::mul(&x0r, &right), &linalg::mul(&left, &ry0));
        let straddle = linalg::scale(&self.dense_straddle(), phase(p, ell));
        let herm = |m: CMat<T>| linalg::add(&m, &linalg::adjoint(&m));
        let zero = linalg::zeros(self.dim(), self.dim());
        Ok(vec![
            ("overlap", self.combine(p, |n| self.dense_ham(n), zero)),
            ("outside", herm(outside)),
            ("between", herm(between)),
            ("touching", herm(touching)),
            ("straddle", herm(straddle)),
        ])
    }

    /// Unprojected H_p (the bond energy is subtracted).
    pub fn raw_hamiltonian_matrix(&self, p: T) -> Result<CMat<T>> {
        let mut cases = self.hamiltonian_cases(p)?.into_iter();
        let (_, mut out) = cases.next().unwrap();
        for (_, m) in cases {
            out = linalg::add(&out, &m);
        }
        Ok(out)
    }

    /// Q^dagger M Q with Q = 1 - G phi^T.
    pub fn project(&self, m: &CMat<T>) -> CMat<T> {
        let g = &self.ground;
        let phi = &self.phi;
        let mg = linalg::matvec(m, g);
        let gm = linalg::adj_matvec(m, g).iter().map(|z| z.conj()).collect::<Vec<_>>();
        let gmg = g.iter().zip(&mg).fold(czero::<T>(), |s, (a, b)| s + a.conj() * *b);
        let dim = self.dim();
        CMat::<T>::from_fn(dim, dim, |i, j| {
            let pi = phi[i].conj();
            m[(i, j)] - mg[i] * phi[j] - pi * gm[j] + pi * gmg * phi[j]
        })
    }

    /// Q B
    pub fn project_vector(&self, b: &[C<T>]) -> Vec<C<T>> {
        let f = self.phi.iter().zip(b).fold(czero::<T>(), |s, (x, y)| s + *x * *y);
        b.iter().zip(&self.ground).map(|(x, g)| *x - *g * f).collect()
    }

    /// N_p on blocks orthogonal to the ground state.
    pub fn norm_matrix(&self, p: T) -> Result<CMat<T>> {
        Ok(self.project(&self.raw_norm_matrix(p)?))
    }

    /// H_p on blocks orthogonal to the ground state.
    pub fn hamiltonian_matrix(&self, p: T) -> Result<CMat<T>> {
        Ok(self.project(&self.raw_hamiltonian_matrix(p)?))
    }

    /// Left/right environments of the operator sum, (l|E_h R_0 and R_0 E_h|r).
    pub fn operator_environments(&self) -> Option<(&[C<T>], &[C<T>])> {
        self.ham.as_ref().map(|h| (h.l_h.as_slice(), h.r_h.as_slice()))
    }
}

fn phase<T: Real>(p: T, n: isize) -> C<T> {
    cis(p * T::lit(n as f64))
}

pub fn effective_norm_matrix<T: Real>(tensor: &MpsTensor<T>, ell: usize, p: T) -> Result<CMat<T>> {
    BlockModel::new(tensor, None, ell)?.norm_matrix(p)
}

pub fn effective_hamiltonian_matrix<T: Real>(tensor: &MpsTensor<T>, h: &CMat<T>, ell: usize, p: T) -> Result<CMat<T>> {
    BlockModel::new(tensor, Some(h), ell)?.hamiltonian_matrix(p)
}

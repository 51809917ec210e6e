//! Finite-window contractions with one or two block tensors.
//!
//! Positions are relative to the bra block, which sits on [0, l). Block index
//! u = (a * d^l + sigma) * D + b, sigma with its first site most significant.
//! Environments: y[beta, kappa] on the left (bra, ket), x[kappa, beta] on the right.

use quasix_core::linalg::CMat;
use quasix_core::scalar::{czero, Real, C};

use crate::tensor::MpsTensor;

/// Small dense D x D products, row-major.
pub(crate) fn mm<T: Real>(a: &[C<T>], b: &[C<T>], n: usize) -> Vec<C<T>> {
    let mut c = vec![czero::<T>(); n * n];
    for i in 0..n {
        for k in 0..n {
            let x = a[i * n + k];
            if x == czero() {
                continue;
            }
            for j in 0..n {
                c[i * n + j] = c[i * n + j] + x * b[k * n + j];
            }
        }
    }
    c
}

/// a^dagger b
pub(crate) fn mm_ha<T: Real>(a: &[C<T>], b: &[C<T>], n: usize) -> Vec<C<T>> {
    let mut c = vec![czero::<T>(); n * n];
    for k in 0..n {
        for i in 0..n {
            let x = a[k * n + i].conj();
            if x == czero() {
                continue;
            }
            for j in 0..n {
                c[i * n + j] = c[i * n + j] + x * b[k * n + j];
            }
        }
    }
    c
}

/// a b^dagger
pub(crate) fn mm_hb<T: Real>(a: &[C<T>], b: &[C<T>], n: usize) -> Vec<C<T>> {
    let mut c = vec![czero::<T>(); n * n];
    for i in 0..n {
        for j in 0..n {
            c[i * n + j] = (0..n).fold(czero::<T>(), |s, k| s + a[i * n + k] * b[j * n + k].conj());
        }
    }
    c
}

pub struct Contractor<T: Real> {
    pub d: usize,
    pub bond: usize,
    pub ell: usize,
    /// strings[len][code] = A^{s_1} ... A^{s_len}
    strings: Vec<Vec<Vec<C<T>>>>,
    /// nonzero entries of the two-site operator: for ket pair code, (bra pair code, value)
    hnz: Vec<Vec<(usize, C<T>)>>,
}

fn code(digits: &[usize], d: usize) -> usize {
    digits.iter().fold(0, |c, &s| c * d + s)
}

impl<T: Real> Contractor<T> {
    pub fn new(t: &MpsTensor<T>, ell: usize, h: Option<&CMat<T>>, max_len: usize) -> Self {
        let (d, dd) = (t.d, t.bond);
        let flat: Vec<Vec<C<T>>> = t.a.iter().map(|m| (0..dd * dd).map(|k| m[(k / dd, k % dd)]).collect()).collect();
        let mut id = vec![czero::<T>(); dd * dd];
        for i in 0..dd {
            id[i * dd + i] = C::new(T::one(), T::zero());
        }
        let mut strings = vec![vec![id]];
        for len in 1..=max_len {
            let prev = &strings[len - 1];
            let next: Vec<Vec<C<T>>> = (0..prev.len() * d).map(|c| mm(&prev[c / d], &flat[c % d], dd)).collect();
            strings.push(next);
        }
        let hnz = match h {
            Some(h) => (0..d * d)
                .map(|s| (0..d * d).filter(|&sp| h[(sp, s)] != czero()).map(|sp| (sp, h[(sp, s)])).collect())
                .collect(),
            None => Vec::new(),
        };
        Contractor { d, bond: dd, ell, strings, hnz }
    }

    pub fn block_dim(&self) -> usize {
        self.bond * self.bond * self.d.pow(self.ell as u32)
    }

    fn string(&self, digits: &[usize]) -> &[C<T>] {
        &self.strings[digits.len()][code(digits, self.d)]
    }

    /// Calls f(ket, bra, weight) for every ket configuration of a window of
    /// `len` sites, with bra = ket except on the operator sites.
    fn configs(&self, len: usize, h_at: Option<usize>, mut f: impl FnMut(&[usize], &[usize], C<T>)) {
        let d = self.d;
        let total = d.pow(len as u32);
        let mut ket = vec![0usize; len];
        let mut bra = vec![0usize; len];
        for c in 0..total {
            let mut r = c;
            for i in (0..len).rev() {
                ket[i] = r % d;
                r /= d;
            }
            match h_at {
                None => f(&ket, &ket, C::new(T::one(), T::zero())),
                Some(j) => {
                    bra.copy_from_slice(&ket);
                    for &(sp, w) in &self.hnz[ket[j] * d + ket[j + 1]] {
                        bra[j] = sp / d;
                        bra[j + 1] = sp % d;
                        f(&ket, &bra, w);
                    }
                }
            }
        }
    }

    /// out[u', u] += scale * <bra block at 0 | window | ket block at n>, window [w0, w1).
    #[allow(clippy::too_many_arguments)]
    pub fn bilinear(
        &self,
        w0: isize,
        w1: isize,
        n: isize,
        h_at: Option<isize>,
        y: &[C<T>],
        x: &[C<T>],
        scale: C<T>,
        out: &mut CMat<T>,
    ) {
        let ell = self.ell as isize;
        debug_assert!(w0 <= 0 && w0 <= n && w1 >= ell && w1 >= n + ell);
        let dd = self.bond;
        let pow = self.d.pow(self.ell as u32);
        let len = (w1 - w0) as usize;
        let at = |x: isize| (x - w0) as usize;
        let h_rel = h_at.map(at);
        let (kb, ke) = (at(n), at(n + ell));
        let (bb, be) = (at(0), at(ell));
        self.configs(len, h_rel, |ket, bra, w| {
            let ket_pre = self.string(&ket[..kb]);
            let ket_post = self.string(&ket[ke..]);
            let bra_pre = self.string(&bra[..bb]);
            let bra_post = self.string(&bra[be..]);
            let sigma = code(&ket[kb..ke], self.d);
            let sigma_p = code(&bra[bb..be], self.d);
            let lp = mm_ha(bra_pre, &mm(y, ket_pre, dd), dd);
            let rp = mm_hb(&mm(ket_post, x, dd), bra_post, dd);
            let w = w * scale;
            for ap in 0..dd {
                for a in 0..dd {
                    let lv = w * lp[ap * dd + a];
                    if lv == czero() {
                        continue;
                    }
                    for b in 0..dd {
                        for bp in 0..dd {
                            let row = (ap * pow + sigma_p) * dd + bp;
                            let col = (a * pow + sigma) * dd + b;
                            out[(row, col)] = out[(row, col)] + lv * rp[b * dd + bp];
                        }
                    }
                }
            }
        });
    }

    /// Bra block at [0, l) with all-A ket on [w0, w1): X[u', (kappa, beta)].
    pub fn bra_block(&self, w0: isize, w1: isize, h_at: Option<isize>, y: &[C<T>], out: &mut CMat<T>) {
        let ell = self.ell as isize;
        let dd = self.bond;
        let pow = self.d.pow(self.ell as u32);
        let len = (w1 - w0) as usize;
        let at = |x: isize| (x - w0) as usize;
        let (bb, be) = (at(0), at(ell));
        self.configs(len, h_at.map(at), |ket, bra, w| {
            let ket_str = self.string(ket);
            let bra_pre = self.string(&bra[..bb]);
            let bra_post = self.string(&bra[be..]);
            let sigma_p = code(&bra[bb..be], self.d);
            let left = mm_ha(bra_pre, &mm(y, ket_str, dd), dd);
            for ap in 0..dd {
                for bp in 0..dd {
                    let row = (ap * pow + sigma_p) * dd + bp;
                    for k in 0..dd {
                        let lv = w * left[ap * dd + k];
                        for be2 in 0..dd {
                            let col = k * dd + be2;
                            out[(row, col)] = out[(row, col)] + lv * bra_post[bp * dd + be2].conj();
                        }
                    }
                }
            }
        });
    }

    /// Ket block at [0, l) with all-A bra on [w0, w1): Y[(kappa, beta), u].
    pub fn ket_block(&self, w0: isize, w1: isize, h_at: Option<isize>, x: &[C<T>], out: &mut CMat<T>) {
        let ell = self.ell as isize;
        let dd = self.bond;
        let pow = self.d.pow(self.ell as u32);
        let len = (w1 - w0) as usize;
        let at = |p: isize| (p - w0) as usize;
        let (kb, ke) = (at(0), at(ell));
        self.configs(len, h_at.map(at), |ket, bra, w| {
            let bra_str = self.string(bra);
            let ket_pre = self.string(&ket[..kb]);
            let ket_post = self.string(&ket[ke..]);
            let sigma = code(&ket[kb..ke], self.d);
            let right = mm_hb(&mm(ket_post, x, dd), bra_str, dd);
            for k in 0..dd {
                for a in 0..dd {
                    let kv = w * ket_pre[k * dd + a];
                    if kv == czero() {
                        continue;
                    }
                    for b in 0..dd {
                        let col = (a * pow + sigma) * dd + b;
                        for be2 in 0..dd {
                            let row = k * dd + be2;
                            out[(row, col)] = out[(row, col)] + kv * right[b * dd + be2];
                        }
                    }
                }
            }
        });
    }

    /// The block vector of the ground state, G[(a, sigma, b)] = (A^{sigma_1} ... A^{sigma_l})[a, b].
    pub fn ground_block(&self) -> Vec<C<T>> {
        let dd = self.bond;
        let pow = self.d.pow(self.ell as u32);
        let mut g = vec![czero::<T>(); self.block_dim()];
        for sigma in 0..pow {
            let m = &self.strings[self.ell][sigma];
            for a in 0..dd {
                for b in 0..dd {
                    g[(a * pow + sigma) * dd + b] = m[a * dd + b];
                }
            }
        }
        g
    }
}

/// Left environment matrix y[beta, kappa] from a row vector over (kappa, beta).
pub fn left_env<T: Real>(row: &[C<T>], dd: usize) -> Vec<C<T>> {
    crate::tensor::transpose_vec(row, dd)
}

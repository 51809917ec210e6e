//! Brute-force reference for effective matrix elements: explicit finite
//! windows, site-by-site environment sweeps, a plain sum over shifts and no
//! resolvents. The two-site operator enters as a window MPO.

use quasix_core::linalg::{self, CMat};
use quasix_core::scalar::{cis, cone, czero, Real, C};

use crate::tensor::{FixedPoints, MpsTensor};

/// Per-site tensor: d matrices of shape (left, right).
type Site<T> = Vec<CMat<T>>;

/// Splits a block vector B[(a, sigma, b)] into l site tensors; the bond after
/// site k carries (a, s_0 .. s_k) and the last site holds B.
fn split_block<T: Real>(b: &[C<T>], d: usize, dd: usize, ell: usize) -> Vec<Site<T>> {
    let pow = d.pow(ell as u32);
    (0..ell)
        .map(|k| {
            let left = dd * d.pow(k as u32);
            let right = if k + 1 == ell { dd } else { dd * d.pow(k as u32 + 1) };
            (0..d)
                .map(|s| {
                    let mut m = linalg::zeros::<T>(left, right);
                    for li in 0..left {
                        // li = a * d^k + c
                        let (a, c) = (li / d.pow(k as u32), li % d.pow(k as u32));
                        let digits = c * d + s;
                        if k + 1 == ell {
                            for bb in 0..dd {
                                m[(li, bb)] = b[(a * pow + digits) * dd + bb];
                            }
                        } else {
                            m[(li, a * d.pow(k as u32 + 1) + digits)] = cone();
                        }
                    }
                    m
                })
                .collect()
        })
        .collect()
}

/// Local operators of the window MPO: (from, to, d x d operator [bra, ket]).
fn mpo<T: Real>(h: Option<&CMat<T>>, d: usize) -> (usize, Vec<(usize, usize, CMat<T>)>) {
    let id = linalg::identity::<T>(d);
    let Some(h) = h else {
        return (1, vec![(0, 0, id)]);
    };
    let k = d * d;
    let done = k + 1;
    let mut edges = vec![(0, 0, id.clone()), (done, done, id)];
    for t in 0..d {
        for s in 0..d {
            let c = t * d + s;
            let mut left = linalg::zeros::<T>(d, d);
            left[(t, s)] = cone();
            let right = CMat::<T>::from_fn(d, d, |t2, s2| h[(t * d + t2, s * d + s2)]);
            edges.push((0, c + 1, left));
            edges.push((c + 1, done, right));
        }
    }
    (k + 2, edges)
}

/// <B'_0| O |B_n> on the window [w0, w1) with l, r outside.
#[allow(clippy::too_many_arguments)]
fn window_element<T: Real>(
    t: &MpsTensor<T>,
    fp: &FixedPoints<T>,
    h: Option<&CMat<T>>,
    ell: usize,
    bra: &[Site<T>],
    ket: &[Site<T>],
    n: isize,
    pad: isize,
    include: &dyn Fn(isize, isize) -> bool,
) -> C<T> {
    let (d, dd) = (t.d, t.bond);
    let e = ell as isize;
    let (w0, w1) = (n.min(0) - pad, (n + e).max(e) + pad);
    let (chi, edges) = mpo(h, d);
    let a: Site<T> = t.a.clone();
    // env[k, m] over (ket, bra) bonds, one per MPO state
    let mut envs: Vec<Option<CMat<T>>> = vec![None; chi];
    envs[0] = Some(CMat::<T>::from_fn(dd, dd, |k, m| fp.l[k * dd + m]));
    for x in w0..w1 {
        let ks = if x >= n && x < n + e { &ket[(x - n) as usize] } else { &a };
        let bs = if (0..e).contains(&x) { &bra[x as usize] } else { &a };
        let mut next: Vec<Option<CMat<T>>> = vec![None; chi];
        for (from, to, o) in &edges {
            let starts = *from == 0 && *to != 0;
            if starts && !include(n, x) {
                continue;
            }
            if let Some(env) = &envs[*from] {
                let v = push_plain(env, ks, bs, o);
                next[*to] = Some(match next[*to].take() {
                    Some(m) => linalg::add(&m, &v),
                    None => v,
                });
            }
        }
        envs = next;
    }
    let Some(last) = envs[chi - 1].as_ref() else {
        return czero();
    };
    (0..dd * dd).fold(czero::<T>(), |s, k| s + last[(k / dd, k % dd)] * fp.r[k])
}

/// env'[k', m'] = sum o[s', s] env[k, m] ket^s[k, k'] conj(bra^{s'}[m, m'])
fn push_plain<T: Real>(env: &CMat<T>, ket: &Site<T>, bra: &Site<T>, o: &CMat<T>) -> CMat<T> {
    let d = ket.len();
    let mut out = linalg::zeros::<T>(ket[0].ncols(), bra[0].ncols());
    for s in 0..d {
        // ket^T env
        let kt = CMat::<T>::from_fn(ket[s].ncols(), ket[s].nrows(), |i, j| ket[s][(j, i)]);
        let ke = linalg::mul(&kt, env);
        for sp in 0..d {
            let w = o[(sp, s)];
            if w == czero() {
                continue;
            }
            let bc = CMat::<T>::from_fn(bra[sp].nrows(), bra[sp].ncols(), |i, j| bra[sp][(i, j)].conj());
            let v = linalg::mul(&ke, &bc);
            for i in 0..out.nrows() {
                for j in 0..out.ncols() {
                    out[(i, j)] = out[(i, j)] + w * v[(i, j)];
                }
            }
        }
    }
    out
}

/// sum_{|n| <= nmax} e^{ipn} <B'_0| sum_j h_j |B_n> (or the overlap when h is None),
/// each term on a window padded by `pad` sites on both sides.
#[allow(clippy::too_many_arguments)]
pub fn brute_force_element<T: Real>(
    t: &MpsTensor<T>,
    fp: &FixedPoints<T>,
    h: Option<&CMat<T>>,
    ell: usize,
    p: T,
    bra: &[C<T>],
    ket: &[C<T>],
    nmax: isize,
    pad: isize,
) -> C<T> {
    brute_force_case(t, fp, h, ell, p, bra, ket, nmax, pad, &|_, _| true)
}

/// As [`brute_force_element`], keeping only operator placements j (left site)
/// for which include(n, j) holds.
#[allow(clippy::too_many_arguments)]
pub fn brute_force_case<T: Real>(
    t: &MpsTensor<T>,
    fp: &FixedPoints<T>,
    h: Option<&CMat<T>>,
    ell: usize,
    p: T,
    bra: &[C<T>],
    ket: &[C<T>],
    nmax: isize,
    pad: isize,
    include: &dyn Fn(isize, isize) -> bool,
) -> C<T> {
    let bs = split_block(bra, t.d, t.bond, ell);
    let ks = split_block(ket, t.d, t.bond, ell);
    (-nmax..=nmax).fold(czero::<T>(), |s, n| {
        s + cis(p * T::lit(n as f64)) * window_element(t, fp, h, ell, &bs, &ks, n, pad, include)
    })
}

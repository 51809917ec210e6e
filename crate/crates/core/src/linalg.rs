//! Dense and sparse complex linear algebra on top of faer.

use faer::linalg::matmul::matmul;
use faer::{Accum, Mat, Par, Side};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::scalar::{cone, cr, czero, Real, C};

pub type CMat<T> = Mat<C<T>>;

pub fn zeros<T: Real>(r: usize, c: usize) -> CMat<T> {
    Mat::from_fn(r, c, |_, _| czero())
}

pub fn identity<T: Real>(n: usize) -> CMat<T> {
    Mat::from_fn(n, n, |i, j| if i == j { cone() } else { czero() })
}

pub fn from_real<T: Real>(r: usize, c: usize, data: &[f64]) -> CMat<T> {
    assert_eq!(data.len(), r * c);
    Mat::from_fn(r, c, |i, j| cr(T::lit(data[i * c + j])))
}

pub fn adjoint<T: Real>(a: &CMat<T>) -> CMat<T> {
    Mat::from_fn(a.ncols(), a.nrows(), |i, j| a[(j, i)].conj())
}

pub fn mul<T: Real>(a: &CMat<T>, b: &CMat<T>) -> CMat<T> {
    let mut out = zeros(a.nrows(), b.ncols());
    matmul(&mut out, Accum::Replace, a, b, cone(), Par::Seq);
    out
}

/// a^dagger b without forming the adjoint.
pub fn mul_adj_left<T: Real>(a: &CMat<T>, b: &CMat<T>) -> CMat<T> {
    let mut out = zeros(a.ncols(), b.ncols());
    matmul(&mut out, Accum::Replace, a.adjoint(), b, cone(), Par::Seq);
    out
}

/// a b^dagger without forming the adjoint.
pub fn mul_adj_right<T: Real>(a: &CMat<T>, b: &CMat<T>) -> CMat<T> {
    let mut out = zeros(a.nrows(), b.nrows());
    matmul(&mut out, Accum::Replace, a, b.adjoint(), cone(), Par::Seq);
    out
}

pub fn scale<T: Real>(a: &CMat<T>, s: C<T>) -> CMat<T> {
    Mat::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)] * s)
}

pub fn add<T: Real>(a: &CMat<T>, b: &CMat<T>) -> CMat<T> {
    Mat::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)] + b[(i, j)])
}

pub fn sub<T: Real>(a: &CMat<T>, b: &CMat<T>) -> CMat<T> {
    Mat::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)] - b[(i, j)])
}

pub fn kron<T: Real>(a: &CMat<T>, b: &CMat<T>) -> CMat<T> {
    let (br, bc) = (b.nrows(), b.ncols());
    Mat::from_fn(a.nrows() * br, a.ncols() * bc, |i, j| {
        a[(i / br, j / bc)] * b[(i % br, j % bc)]
    })
}

pub fn trace<T: Real>(a: &CMat<T>) -> C<T> {
    (0..a.nrows().min(a.ncols())).fold(czero::<T>(), |s, i| s + a[(i, i)])
}

pub fn frobenius<T: Real>(a: &CMat<T>) -> T {
    let mut s = T::zero();
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            s = s + a[(i, j)].norm_sqr();
        }
    }
    s.sqrt()
}

pub fn max_abs<T: Real>(a: &CMat<T>) -> T {
    let mut m = T::zero();
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            m = m.max(a[(i, j)].norm());
        }
    }
    m
}

/// max |a - a^dagger|
pub fn hermiticity_residual<T: Real>(a: &CMat<T>) -> T {
    let mut m = T::zero();
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            m = m.max((a[(i, j)] - a[(j, i)].conj()).norm());
        }
    }
    m
}

/// Largest singular value.
pub fn op_norm<T: Real>(a: &CMat<T>) -> Result<T> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return Ok(T::zero());
    }
    let sv = a.singular_values().map_err(|e| Error::Numerical(format!("svd: {e:?}")))?;
    Ok(sv.into_iter().fold(T::zero(), |m, x| m.max(x)))
}

/// Hermitian eigendecomposition, eigenvalues ascending, eigenvectors in columns.
pub fn eigh<T: Real>(a: &CMat<T>) -> Result<(Vec<T>, CMat<T>)> {
    let n = a.nrows();
    if n == 0 {
        return Ok((Vec::new(), zeros(0, 0)));
    }
    let evd = a
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Numerical(format!("eigh: {e:?}")))?;
    let s = evd.S().column_vector();
    let u = evd.U();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| s[i].re.partial_cmp(&s[j].re).unwrap());
    let vals = order.iter().map(|&i| s[i].re).collect();
    let vecs = Mat::from_fn(n, n, |i, j| u[(i, order[j])]);
    Ok((vals, vecs))
}

pub fn eigvalsh<T: Real>(a: &CMat<T>) -> Result<Vec<T>> {
    if a.nrows() == 0 {
        return Ok(Vec::new());
    }
    let mut v: Vec<T> = a
        .self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| Error::Numerical(format!("eigvalsh: {e:?}")))?;
    v.sort_by(|x, y| x.partial_cmp(y).unwrap());
    Ok(v)
}

/// Real symmetric eigendecomposition (used for Lanczos tridiagonals).
pub fn eigh_real<T: Real>(a: &Mat<T>) -> Result<(Vec<T>, Mat<T>)> {
    let n = a.nrows();
    let evd = a
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Numerical(format!("eigh: {e:?}")))?;
    let s = evd.S().column_vector();
    let u = evd.U();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| s[i].partial_cmp(&s[j]).unwrap());
    let vals = order.iter().map(|&i| s[i]).collect();
    let vecs = Mat::from_fn(n, n, |i, j| u[(i, order[j])]);
    Ok((vals, vecs))
}

/// General (non-Hermitian) eigendecomposition, eigenvalues by decreasing modulus.
pub fn eig<T: Real>(a: &CMat<T>) -> Result<(Vec<C<T>>, CMat<T>)> {
    let n = a.nrows();
    if n == 0 {
        return Ok((Vec::new(), zeros(0, 0)));
    }
    let evd = a.eigen().map_err(|e| Error::Numerical(format!("eig: {e:?}")))?;
    let s = evd.S().column_vector();
    let u = evd.U();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| s[j].norm().partial_cmp(&s[i].norm()).unwrap());
    let vals = order.iter().map(|&i| s[i]).collect();
    let vecs = Mat::from_fn(n, n, |i, j| u[(i, order[j])]);
    Ok((vals, vecs))
}

/// Solves a x = b by LU with partial pivoting.
pub fn solve<T: Real>(a: &CMat<T>, b: &CMat<T>) -> CMat<T> {
    use faer::linalg::solvers::Solve;
    a.partial_piv_lu().solve(b)
}

/// Singular values, descending.
pub fn singular_values<T: Real>(a: &CMat<T>) -> Result<Vec<T>> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return Ok(Vec::new());
    }
    let mut sv = a.singular_values().map_err(|e| Error::Numerical(format!("svd: {e:?}")))?;
    sv.sort_by(|x, y| y.partial_cmp(x).unwrap());
    Ok(sv)
}

/// Thin SVD a = u diag(s) v^dagger with singular values descending.
pub fn svd<T: Real>(a: &CMat<T>) -> Result<(CMat<T>, Vec<T>, CMat<T>)> {
    let d = a.thin_svd().map_err(|e| Error::Numerical(format!("svd: {e:?}")))?;
    let s: Vec<T> = d.S().column_vector().iter().map(|x| x.re).collect();
    Ok((d.U().to_owned(), s, d.V().to_owned()))
}

pub fn dot<T: Real>(a: &[C<T>], b: &[C<T>]) -> C<T> {
    a.iter().zip(b).fold(czero::<T>(), |s, (x, y)| s + x.conj() * y)
}

pub fn norm<T: Real>(a: &[C<T>]) -> T {
    a.iter().fold(T::zero(), |s, x| s + x.norm_sqr()).sqrt()
}

pub fn column<T: Real>(a: &CMat<T>, j: usize) -> Vec<C<T>> {
    (0..a.nrows()).map(|i| a[(i, j)]).collect()
}

/// y = a^dagger x
pub fn adj_matvec<T: Real>(a: &CMat<T>, x: &[C<T>]) -> Vec<C<T>> {
    (0..a.ncols())
        .map(|j| (0..a.nrows()).fold(czero::<T>(), |s, i| s + a[(i, j)].conj() * x[i]))
        .collect()
}

pub fn matvec<T: Real>(a: &CMat<T>, x: &[C<T>]) -> Vec<C<T>> {
    let mut y = vec![czero(); a.nrows()];
    for j in 0..a.ncols() {
        let xj = x[j];
        if xj == czero() {
            continue;
        }
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = *yi + a[(i, j)] * xj;
        }
    }
    y
}

/// Compressed sparse row matrix.
#[derive(Clone, Debug)]
pub struct Csr<T: Real> {
    pub nrows: usize,
    pub ncols: usize,
    pub indptr: Vec<usize>,
    pub indices: Vec<usize>,
    pub values: Vec<C<T>>,
}

impl<T: Real> Csr<T> {
    /// Builds from per-row (column, value) lists, summing duplicates and dropping exact zeros.
    pub fn from_rows(ncols: usize, rows: Vec<Vec<(usize, C<T>)>>) -> Self {
        let mut indptr = Vec::with_capacity(rows.len() + 1);
        let mut indices = Vec::new();
        let mut values = Vec::new();
        indptr.push(0);
        for mut row in rows.into_iter() {
            row.sort_by_key(|e| e.0);
            let mut k = 0;
            while k < row.len() {
                let col = row[k].0;
                let mut v = row[k].1;
                k += 1;
                while k < row.len() && row[k].0 == col {
                    v = v + row[k].1;
                    k += 1;
                }
                if v != czero() {
                    indices.push(col);
                    values.push(v);
                }
            }
            indptr.push(indices.len());
        }
        Csr { nrows: indptr.len() - 1, ncols, indptr, indices, values }
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn matvec(&self, x: &[C<T>], y: &mut [C<T>]) {
        for i in 0..self.nrows {
            let mut s = czero();
            for k in self.indptr[i]..self.indptr[i + 1] {
                s = s + self.values[k] * x[self.indices[k]];
            }
            y[i] = s;
        }
    }

    pub fn to_dense(&self) -> CMat<T> {
        let mut m = zeros(self.nrows, self.ncols);
        for i in 0..self.nrows {
            for k in self.indptr[i]..self.indptr[i + 1] {
                m[(i, self.indices[k])] = m[(i, self.indices[k])] + self.values[k];
            }
        }
        m
    }
}

#[derive(Clone, Debug)]
pub struct LanczosOptions {
    pub max_iter: usize,
    pub tol: f64,
    pub seed: u64,
}

impl Default for LanczosOptions {
    fn default() -> Self {
        LanczosOptions { max_iter: 400, tol: 1e-10, seed: 7 }
    }
}

#[derive(Clone, Debug)]
pub struct LanczosResult<T: Real> {
    pub values: Vec<T>,
    pub vectors: Vec<Vec<C<T>>>,
    pub residuals: Vec<T>,
    pub iterations: usize,
    pub converged: bool,
}

/// Lowest `k` eigenpairs of a Hermitian operator given by its action.
/// Full reorthogonalization; exact degeneracies show up once.
pub fn lanczos_lowest<T, F>(apply: F, dim: usize, k: usize, opts: &LanczosOptions) -> Result<LanczosResult<T>>
where
    T: Real,
    F: Fn(&[C<T>], &mut [C<T>]),
{
    if dim == 0 || k == 0 {
        return Ok(LanczosResult { values: vec![], vectors: vec![], residuals: vec![], iterations: 0, converged: true });
    }
    let k = k.min(dim);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut v: Vec<C<T>> = (0..dim)
        .map(|_| C::new(T::lit(rng.gen::<f64>() - 0.5), T::lit(rng.gen::<f64>() - 0.5)))
        .collect();
    let nv = norm(&v);
    v.iter_mut().for_each(|x| *x = *x / cr(nv));
    let mut basis: Vec<Vec<C<T>>> = vec![v];
    let mut alpha: Vec<T> = Vec::new();
    let mut beta: Vec<T> = Vec::new();
    let mut w = vec![czero(); dim];
    let maxit = opts.max_iter.min(dim);
    let tol = T::lit(opts.tol);
    let mut last: Option<(Vec<T>, Mat<T>)> = None;
    let mut converged = false;
    for it in 0..maxit {
        apply(&basis[it], &mut w);
        let a = dot(&basis[it], &w).re;
        alpha.push(a);
        for b in basis.iter() {
            let c = dot(b, &w);
            w.iter_mut().zip(b).for_each(|(x, y)| *x = *x - c * y);
        }
        for b in basis.iter() {
            let c = dot(b, &w);
            w.iter_mut().zip(b).for_each(|(x, y)| *x = *x - c * y);
        }
        let bnorm = norm(&w);
        let m = alpha.len();
        let check = m >= k && (m % 5 == 0 || bnorm < T::lit(1e-12) || m == maxit);
        if check {
            let t = Mat::from_fn(m, m, |i, j| {
                if i == j {
                    alpha[i]
                } else if i + 1 == j {
                    beta[i]
                } else if j + 1 == i {
                    beta[j]
                } else {
                    T::zero()
                }
            });
            let (vals, vecs) = eigh_real(&t)?;
            let scale_ref = vals.iter().fold(T::one(), |s, x| s.max(x.abs()));
            let ok = (0..k).all(|i| (bnorm * vecs[(m - 1, i)]).abs() <= tol * scale_ref);
            last = Some((vals, vecs));
            if ok || bnorm < T::lit(1e-12) {
                converged = true;
                break;
            }
        }
        if bnorm < T::lit(1e-12) {
            break;
        }
        beta.push(bnorm);
        basis.push(w.iter().map(|x| *x / cr(bnorm)).collect());
    }
    let m = alpha.len();
    let (vals, vecs) = match last {
        Some(x) if x.0.len() == m => x,
        _ => {
            let t = Mat::from_fn(m, m, |i, j| {
                if i == j {
                    alpha[i]
                } else if i + 1 == j {
                    beta[i]
                } else if j + 1 == i {
                    beta[j]
                } else {
                    T::zero()
                }
            });
            eigh_real(&t)?
        }
    };
    let kk = k.min(m);
    let mut vectors = Vec::with_capacity(kk);
    let mut residuals = Vec::with_capacity(kk);
    for i in 0..kk {
        let mut x = vec![czero(); dim];
        for (j, b) in basis.iter().take(m).enumerate() {
            let c = cr(vecs[(j, i)]);
            x.iter_mut().zip(b).for_each(|(xi, bi)| *xi = *xi + c * bi);
        }
        let nx = norm(&x);
        x.iter_mut().for_each(|xi| *xi = *xi / cr(nx));
        apply(&x, &mut w);
        let r = w
            .iter()
            .zip(&x)
            .fold(T::zero(), |s, (wi, xi)| s + (*wi - *xi * cr(vals[i])).norm_sqr())
            .sqrt();
        residuals.push(r);
        vectors.push(x);
    }
    Ok(LanczosResult { values: vals[..kk].to_vec(), vectors, residuals, iterations: m, converged })
}

/// Largest singular value estimate by power iteration on a^dagger a (matrix free).
pub fn power_norm<T, F, G>(apply: F, apply_adj: G, dim: usize, iters: usize, seed: u64) -> T
where
    T: Real,
    F: Fn(&[C<T>]) -> Vec<C<T>>,
    G: Fn(&[C<T>]) -> Vec<C<T>>,
{
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x: Vec<C<T>> = (0..dim).map(|_| C::new(T::lit(rng.gen::<f64>() - 0.5), T::lit(rng.gen::<f64>() - 0.5))).collect();
    let mut est = T::zero();
    for _ in 0..iters {
        let nx = norm(&x);
        if nx == T::zero() {
            return T::zero();
        }
        x.iter_mut().for_each(|v| *v = *v / cr(nx));
        let y = apply(&x);
        est = norm(&y);
        x = apply_adj(&y);
    }
    est
}

//! Geometric sums of transfer powers with a momentum phase,
//! sum_{n >= 0} e^{ipn} E~^n P = (1 - e^{ip} E~)^{-1} P, E~ = E - |r)(l|, P = 1 - |r)(l|.

use quasix_core::linalg::{self, CMat};
use quasix_core::scalar::{cis, cone, czero, Real, C};
use quasix_core::{Error, Result};

/// |r)(l|
pub fn dominant_projector<T: Real>(l: &[C<T>], r: &[C<T>]) -> CMat<T> {
    CMat::<T>::from_fn(r.len(), l.len(), |i, j| r[i] * l[j])
}

fn shifted_system<T: Real>(e: &CMat<T>, p: T, l: &[C<T>], r: &[C<T>], projected: bool) -> CMat<T> {
    let rl = dominant_projector(l, r);
    let et = if projected { linalg::sub(e, &rl) } else { e.clone() };
    let ph = cis(p);
    CMat::<T>::from_fn(e.nrows(), e.ncols(), |i, j| if i == j { cone::<T>() } else { czero::<T>() } - ph * et[(i, j)])
}

fn check_conditioning<T: Real>(a: &CMat<T>) -> Result<()> {
    let sv = linalg::singular_values(a)?;
    let (max, min) = (sv[0], *sv.last().unwrap());
    if !(min > T::lit(1e-12) * max) {
        return Err(Error::Numerical(format!(
            "resolvent system is ill-conditioned (smallest singular value {:e}, largest {:e})", min.to_f64_lossy(), max.to_f64_lossy()
        )));
    }
    Ok(())
}

/// R_p = (1 - e^{ip} E~)^{-1} P as a matrix.
pub fn regularized_resolvent<T: Real>(e: &CMat<T>, p: T, l: &[C<T>], r: &[C<T>]) -> Result<CMat<T>> {
    let a = shifted_system(e, p, l, r, true);
    check_conditioning(&a)?;
    let proj = linalg::sub(&linalg::identity(e.nrows()), &dominant_projector(l, r));
    Ok(linalg::solve(&a, &proj))
}

/// Solves (1 - e^{ip} E~) x = P b.
pub fn regularized_resolvent_apply<T: Real>(e: &CMat<T>, p: T, l: &[C<T>], r: &[C<T>], b: &[C<T>]) -> Result<Vec<C<T>>> {
    let a = shifted_system(e, p, l, r, true);
    check_conditioning(&a)?;
    let pb = project(l, r, b);
    Ok(linalg::column(&linalg::solve(&a, &CMat::<T>::from_fn(b.len(), 1, |i, _| pb[i])), 0))
}

/// Solves (1 - e^{ip} E) x = P b without removing the dominant eigenspace; only valid for p != 0.
pub fn unprojected_resolvent_apply<T: Real>(e: &CMat<T>, p: T, l: &[C<T>], r: &[C<T>], b: &[C<T>]) -> Result<Vec<C<T>>> {
    let a = shifted_system(e, p, l, r, false);
    check_conditioning(&a)?;
    let pb = project(l, r, b);
    Ok(linalg::column(&linalg::solve(&a, &CMat::<T>::from_fn(b.len(), 1, |i, _| pb[i])), 0))
}

/// P b = b - r (l|b)
pub fn project<T: Real>(l: &[C<T>], r: &[C<T>], b: &[C<T>]) -> Vec<C<T>> {
    let lb = l.iter().zip(b).fold(C::new(T::zero(), T::zero()), |s, (x, y)| s + *x * *y);
    b.iter().zip(r).map(|(bi, ri)| *bi - *ri * lb).collect()
}

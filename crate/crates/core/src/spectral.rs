//! Dynamic correlation function D(p, w) = sum_a |<Psi_{p,a}|O(p)|Psi_0>|^2 / (w - E_{p,a} + i eps)
//! and the spectral function S = -Im D / pi, with residues taken from eigenvectors.

use crate::error::{Error, Result};
use crate::ops::RegionOperator;
use crate::scalar::{czero, Real, C};
use crate::sector::Spectrum;

#[derive(Clone, Debug)]
pub struct SpectralLine<T: Real> {
    pub k: usize,
    pub p: f64,
    pub omega: Vec<T>,
    pub eps: T,
    pub d: Vec<C<T>>,
    pub s: Vec<T>,
}

/// Exact residues |<Psi_{p,a}|O(p)|Psi_0>|^2 with their energies.
pub fn peak_weights<T: Real>(spec: &Spectrum<T>, op: &RegionOperator<T>, k: usize) -> Result<Vec<(T, T)>> {
    let (_, eig) = spec.sector(k)?;
    let phi = spec.momentum_state(op, k)?;
    Ok(eig.overlaps(&phi).iter().zip(&eig.energies).map(|(c, &e)| (e, c.norm_sqr())).collect())
}

/// D and S on a frequency grid from precomputed residues.
pub fn line_from_residues<T: Real>(k: usize, p: f64, residues: &[(T, T)], omega: &[T], eps: T) -> Result<SpectralLine<T>> {
    if !(eps > T::zero()) {
        return Err(Error::Invalid("broadening must be positive".into()));
    }
    let d: Vec<C<T>> = omega
        .iter()
        .map(|&w| residues.iter().fold(czero::<T>(), |s, &(e, r)| s + C::new(r, T::zero()) / C::new(w - e, eps)))
        .collect();
    let s = d.iter().map(|z| -z.im / T::PI()).collect();
    Ok(SpectralLine { k, p, omega: omega.to_vec(), eps, d, s })
}

pub fn dynamic_correlation<T: Real>(
    spec: &Spectrum<T>,
    op: &RegionOperator<T>,
    k: usize,
    omega: &[T],
    eps: T,
) -> Result<SpectralLine<T>> {
    let residues = peak_weights(spec, op, k)?;
    let (sector, _) = spec.sector(k)?;
    line_from_residues(k, sector.p(), &residues, omega, eps)
}

/// Default grid: `points` frequencies on [-gap, e_max + gap], eps = 0.02 gap.
pub fn default_grid<T: Real>(gap: T, e_max: T, points: usize) -> (Vec<T>, T) {
    let lo = -gap;
    let hi = e_max + gap;
    let m = points.max(2) - 1;
    let omega = (0..=m).map(|i| lo + (hi - lo) * T::of(i) / T::of(m)).collect();
    (omega, T::lit(0.02) * gap)
}

/// Trapezoid integral of S over the grid.
pub fn sum_rule<T: Real>(line: &SpectralLine<T>) -> T {
    line.omega
        .windows(2)
        .zip(line.s.windows(2))
        .fold(T::zero(), |acc, (w, s)| acc + (w[1] - w[0]) * (s[0] + s[1]) / T::lit(2.0))
}

/// Relative L2 mismatch between Re D and its Kramers-Kronig reconstruction from Im D
/// on the same grid, evaluated on the central `interior` fraction of points.
pub fn kramers_kronig_residual<T: Real>(line: &SpectralLine<T>, interior: T) -> T {
    let w = &line.omega;
    let im: Vec<T> = line.d.iter().map(|z| z.im).collect();
    let n = w.len();
    let (lo, hi) = (w[0], w[n - 1]);
    let cut = ((T::one() - interior) / T::lit(2.0) * T::of(n)).to_usize().unwrap_or(0);
    let mut num = T::zero();
    let mut den = T::zero();
    for i in cut..n - cut {
        // Re D(w) = (1/pi) P int Im D(w') / (w' - w) dw', singularity subtracted
        let f = |j: usize| if j == i { T::zero() } else { (im[j] - im[i]) / (w[j] - w[i]) };
        let mut integral = T::zero();
        for j in 0..n - 1 {
            let (a, b) = if j == i || j + 1 == i {
                // derivative limit at the subtracted point via neighbours
                let di = if i > 0 && i + 1 < n { (im[i + 1] - im[i - 1]) / (w[i + 1] - w[i - 1]) } else { T::zero() };
                (if j == i { di } else { f(j) }, if j + 1 == i { di } else { f(j + 1) })
            } else {
                (f(j), f(j + 1))
            };
            integral = integral + (w[j + 1] - w[j]) * (a + b) / T::lit(2.0);
        }
        integral = integral + im[i] * ((hi - w[i]) / (w[i] - lo)).ln();
        let kk = integral / T::PI();
        let re = line.d[i].re;
        num = num + (kk - re) * (kk - re);
        den = den + re * re;
    }
    if den == T::zero() {
        return T::zero();
    }
    (num / den).sqrt()
}

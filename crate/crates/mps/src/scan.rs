//! Dispersion scans over block lengths and momenta, convergence tables and
//! multi-magnon continuum edges.

use quasix_core::linalg::CMat;
use quasix_core::scalar::Real;
use quasix_core::Result;
use rayon::prelude::*;

use crate::effective::BlockModel;
use crate::solve::{excitation_energies, ExcitationLevels, RANK_TOL};
use crate::tensor::MpsTensor;

#[derive(Clone, Debug)]
pub struct BandPoint<T: Real> {
    pub p: T,
    pub levels: ExcitationLevels<T>,
}

#[derive(Clone, Debug)]
pub struct ExcitationBand<T: Real> {
    pub ell: usize,
    pub points: Vec<BandPoint<T>>,
}

impl<T: Real> ExcitationBand<T> {
    pub fn momenta(&self) -> Vec<T> {
        self.points.iter().map(|x| x.p).collect()
    }

    pub fn emin(&self) -> Vec<T> {
        self.points.iter().map(|x| x.levels.min()).collect()
    }
}

/// Lowest levels of the ansatz with block length `ell` at one momentum.
pub fn levels_at<T: Real>(model: &BlockModel<T>, p: T, keep: usize) -> Result<ExcitationLevels<T>> {
    let n = model.norm_matrix(p)?;
    let h = model.hamiltonian_matrix(p)?;
    let mut lv = excitation_energies(&n, &h, T::lit(RANK_TOL), keep)?;
    lv.vectors = lv.vectors.iter().map(|v| model.project_vector(v)).collect();
    Ok(lv)
}

/// One band per block length; momenta are processed in parallel.
pub fn dispersion_scan<T: Real>(tensor: &MpsTensor<T>, h: &CMat<T>, ells: &[usize], p_grid: &[T], keep: usize) -> Result<Vec<ExcitationBand<T>>> {
    let mut bands = Vec::with_capacity(ells.len());
    for &ell in ells {
        let model = BlockModel::new(tensor, Some(h), ell)?;
        let points: Result<Vec<BandPoint<T>>> = p_grid
            .par_iter()
            .map(|&p| Ok(BandPoint { p, levels: levels_at(&model, p, keep)? }))
            .collect();
        bands.push(ExcitationBand { ell, points: points? });
    }
    Ok(bands)
}

/// Ratio above which successive differences count as slow.
pub const SLOW_RATIO: f64 = 0.9;

#[derive(Clone, Debug)]
pub struct ConvergenceRow<T: Real> {
    pub p: T,
    /// E^(l)_min for l = 1..=lmax
    pub emin: Vec<T>,
    /// E^(l)_min - E^(l+1)_min for l = 1..lmax
    pub diffs: Vec<T>,
    /// diffs[l] / diffs[l - 1]
    pub ratios: Vec<T>,
    pub borderline: bool,
}

#[derive(Clone, Debug)]
pub struct ConvergenceTable<T: Real> {
    pub lmax: usize,
    pub rows: Vec<ConvergenceRow<T>>,
    /// index of the row whose largest ratio is closest to 1
    pub slowest: usize,
}

fn max_ratio<T: Real>(r: &ConvergenceRow<T>) -> T {
    r.ratios.iter().fold(T::neg_infinity(), |m, &x| m.max(x))
}

/// E^(l)_min(p) for l = 1..=lmax and the successive differences. A momentum is
/// borderline when a difference is not positive, a ratio exceeds 0.9, or it is
/// the slowest-converging of the sampled momenta.
pub fn converge<T: Real>(tensor: &MpsTensor<T>, h: &CMat<T>, ps: &[T], lmax: usize) -> Result<ConvergenceTable<T>> {
    let ells: Vec<usize> = (1..=lmax).collect();
    let bands = dispersion_scan(tensor, h, &ells, ps, 1)?;
    let mut rows: Vec<ConvergenceRow<T>> = ps
        .iter()
        .enumerate()
        .map(|(i, &p)| {
            let emin: Vec<T> = bands.iter().map(|b| b.points[i].levels.min()).collect();
            let diffs: Vec<T> = emin.windows(2).map(|w| w[0] - w[1]).collect();
            let ratios: Vec<T> = diffs.windows(2).map(|w| w[1] / w[0]).collect();
            let slow = diffs.iter().any(|&d| !(d > T::zero())) || ratios.iter().any(|&r| r > T::lit(SLOW_RATIO));
            ConvergenceRow { p, emin, diffs, ratios, borderline: slow }
        })
        .collect();
    let slowest = (0..rows.len())
        .min_by(|&a, &b| {
            let (ra, rb) = (max_ratio(&rows[a]), max_ratio(&rows[b]));
            (ra - T::one()).abs().partial_cmp(&(rb - T::one()).abs()).unwrap()
        })
        .unwrap_or(0);
    if let Some(r) = rows.get_mut(slowest) {
        r.borderline = true;
    }
    Ok(ConvergenceTable { lmax, rows, slowest })
}

/// Trigonometric interpolant of samples on the uniform grid 2 pi j / m.
#[derive(Clone, Debug)]
pub struct Fourier {
    coeffs: Vec<(f64, f64)>,
    m: usize,
}

impl Fourier {
    pub fn new(samples: &[f64]) -> Self {
        let m = samples.len();
        let coeffs = (0..m)
            .map(|k| {
                let (mut re, mut im) = (0.0, 0.0);
                for (j, &v) in samples.iter().enumerate() {
                    let th = -2.0 * std::f64::consts::PI * (k * j) as f64 / m as f64;
                    re += v * th.cos();
                    im += v * th.sin();
                }
                (re / m as f64, im / m as f64)
            })
            .collect();
        Fourier { coeffs, m }
    }

    pub fn eval(&self, x: f64) -> f64 {
        let m = self.m;
        let mut s = 0.0;
        for (k, &(re, im)) in self.coeffs.iter().enumerate() {
            if 2 * k == m {
                // Nyquist term of an even grid
                s += re * ((k as f64) * x).cos();
                continue;
            }
            let f = if 2 * k < m { k as f64 } else { k as f64 - m as f64 };
            s += re * (f * x).cos() - im * (f * x).sin();
        }
        s
    }
}

/// Minimizes f on [0, 2 pi) by a grid scan and golden-section refinement around the best point.
pub fn periodic_min(f: impl Fn(f64) -> f64, grid: usize) -> (f64, f64) {
    let two_pi = 2.0 * std::f64::consts::PI;
    let h = two_pi / grid as f64;
    let (mut best_x, mut best) = (0.0, f64::INFINITY);
    for i in 0..grid {
        let x = i as f64 * h;
        let v = f(x);
        if v < best {
            best = v;
            best_x = x;
        }
    }
    let (mut a, mut b) = (best_x - h, best_x + h);
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..80 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    let x = (a + b) / 2.0;
    let v = f(x);
    if v < best {
        (x.rem_euclid(two_pi), v)
    } else {
        (best_x, best)
    }
}

#[derive(Clone, Debug)]
pub struct ContinuumEdges {
    pub p: Vec<f64>,
    pub two: Vec<f64>,
    pub three: Vec<f64>,
}

/// Lower edges of the two- and three-magnon continua from a single-magnon band
/// sampled on the uniform grid 2 pi j / m: two(p) = min_k e(k) + e(p - k),
/// three(p) = min_k two(p - k) + e(k).
pub fn continuum_edges(eps: &[f64], p: &[f64]) -> ContinuumEdges {
    let f = Fourier::new(eps);
    let grid = (4 * eps.len()).max(64);
    let two_at = |q: f64| periodic_min(|k| f.eval(k) + f.eval(q - k), grid).1;
    let two: Vec<f64> = p.iter().map(|&q| two_at(q)).collect();
    let coarse = grid / 2;
    let three: Vec<f64> = p
        .iter()
        .map(|&q| periodic_min(|k| two_at(q - k) + f.eval(k), coarse).1)
        .collect();
    ContinuumEdges { p: p.to_vec(), two, three }
}

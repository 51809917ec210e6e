//! Independent reference computations used by the test suites.

use std::f64::consts::PI;

use crate::error::Result;
use crate::lattice::{Chain, Region};
use crate::linalg::{self, CMat};
use crate::models::LocalHamiltonian;
use crate::ops::RegionOperator;
use crate::scalar::{czero, Real};

/// All eigenvalues of the dense product-basis Hamiltonian, ascending.
pub fn dense_spectrum<T: Real>(h: &LocalHamiltonian<T>) -> Result<Vec<T>> {
    linalg::eigvalsh(&h.dense())
}

/// Quasiparticle energy of -sum zz - g sum x at mode k.
pub fn tfim_mode_energy(g: f64, k: f64) -> f64 {
    2.0 * (1.0 + g * g - 2.0 * g * k.cos()).sqrt()
}

/// Many-body levels of the periodic TFIM (g > 1) with at most `max_particles`
/// quasiparticles, as (momentum index, energy above the ground state).
/// Even parity uses antiperiodic modes with an even occupation, odd parity
/// periodic modes with an odd occupation.
pub fn tfim_free_fermion_levels(n: usize, g: f64, max_particles: usize) -> Vec<(usize, f64)> {
    let ns: Vec<(usize, f64)> = (0..n).map(|m| (2 * m + 1, PI * (2 * m + 1) as f64 / n as f64)).collect();
    let r: Vec<(usize, f64)> = (0..n).map(|m| (2 * m, 2.0 * PI * m as f64 / n as f64)).collect();
    let vac = |modes: &[(usize, f64)]| -> f64 { -0.5 * modes.iter().map(|&(_, k)| tfim_mode_energy(g, k)).sum::<f64>() };
    let e0 = vac(&ns);
    let mut out = Vec::new();
    for (modes, odd) in [(&ns, false), (&r, true)] {
        let base = vac(modes);
        let mut stack: Vec<(usize, usize, f64, usize)> = vec![(0, 0, base, 0)];
        // (next mode, particles, energy, sum of half-momentum units)
        while let Some((next, cnt, e, units)) = stack.pop() {
            if cnt % 2 == usize::from(odd) {
                // units are multiples of pi/N
                debug_assert!(units % 2 == 0);
                out.push(((units / 2) % n, e - e0));
            }
            if cnt == max_particles {
                continue;
            }
            for j in next..n {
                let (u, k) = modes[j];
                stack.push((j + 1, cnt + 1, e + tfim_mode_energy(g, k), units + u));
            }
        }
    }
    out.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.partial_cmp(&b.1).unwrap()));
    out
}

/// Normalized partial trace by explicit digit contraction.
pub fn partial_trace_contract<T: Real>(full: &CMat<T>, chain: Chain, region: &Region) -> Result<RegionOperator<T>> {
    let keep = region.arc_order()?;
    let env: Vec<usize> = region.complement().sites().to_vec();
    let d = chain.d;
    let dk = d.pow(keep.len() as u32);
    let de = d.pow(env.len() as u32);
    let config = |idx: usize, sites: &[usize], digits: &mut [usize]| {
        let mut rem = idx;
        for &s in sites.iter().rev() {
            digits[s] = rem % d;
            rem /= d;
        }
    };
    let mut m = linalg::zeros::<T>(dk, dk);
    let mut da = vec![0; chain.n];
    let mut db = vec![0; chain.n];
    for u in 0..dk {
        for v in 0..dk {
            let mut s = czero::<T>();
            for e in 0..de {
                config(u, &keep, &mut da);
                config(e, &env, &mut da);
                config(v, &keep, &mut db);
                config(e, &env, &mut db);
                s = s + full[(chain.encode(&da), chain.encode(&db))];
            }
            m[(u, v)] = s / T::of(de);
        }
    }
    RegionOperator::new(chain, keep, m)
}

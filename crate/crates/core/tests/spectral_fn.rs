use quasix_core::linalg::{self, LanczosOptions};
use quasix_core::models::{build_model, ModelKind};
use quasix_core::ops::parse_product;
use quasix_core::oracles::tfim_free_fermion_levels;
use quasix_core::sector::{SolveMode, Spectrum};
use quasix_core::spectral::{
    default_grid, dynamic_correlation, kramers_kronig_residual, line_from_residues, peak_weights, sum_rule,
};

fn tfim(n: usize) -> Spectrum<f64> {
    let h = build_model::<f64>(ModelKind::Tfim, &[2.0], n).unwrap();
    Spectrum::solve(&h, SolveMode::Full, &LanczosOptions::default()).unwrap()
}

fn emax(spec: &Spectrum<f64>) -> f64 {
    spec.eig.iter().flat_map(|e| e.energies.iter().copied()).fold(0.0, f64::max)
}

#[test]
fn single_pole_line() {
    let omega: Vec<f64> = (0..50).map(|i| i as f64 * 0.1).collect();
    let line = line_from_residues(0, 0.0, &[(1.7, 1.0)], &omega, 0.05).unwrap();
    for (w, d) in omega.iter().zip(&line.d) {
        let want = num_complex::Complex::new(1.0, 0.0) / num_complex::Complex::new(w - 1.7, 0.05);
        assert!((d - want).norm() < 1e-14);
    }
    assert!(line_from_residues(0, 0.0, &[(1.7, 1.0)], &omega, 0.0).is_err());
}

#[test]
fn residues_sum_rule_and_positivity() {
    let spec = tfim(8);
    let op = parse_product::<f64>("sz0", spec.table.chain).unwrap();
    let (omega, eps) = default_grid(spec.gap(), emax(&spec), 2001);
    for k in 0..8 {
        let w = peak_weights(&spec, &op, k).unwrap();
        let phi = spec.momentum_state(&op, k).unwrap();
        let total = linalg::norm(&phi).powi(2);
        let sum: f64 = w.iter().map(|x| x.1).sum();
        assert!((sum - total).abs() < 1e-10 * (1.0 + total));
        let line = dynamic_correlation(&spec, &op, k, &omega, eps).unwrap();
        assert!(line.s.iter().all(|&s| s >= -1e-12));
        let integral = sum_rule(&line);
        assert!((integral - total).abs() <= 0.01 * total, "k={k}: {integral} vs {total}");
        let kk = kramers_kronig_residual(&line, 0.8);
        assert!(kk < 0.02, "k={k}: KK residual {kk}");
    }
}

#[test]
fn zero_operator_has_no_weight() {
    let spec = tfim(6);
    let op = parse_product::<f64>("id1", spec.table.chain).unwrap();
    let w = peak_weights(&spec, &op, 2).unwrap();
    assert!(w.iter().all(|x| x.1 < 1e-26));
}

#[test]
fn sz_dominant_peak_is_single_magnon() {
    let n = 8;
    let spec = tfim(n);
    let op = parse_product::<f64>("sz0", spec.table.chain).unwrap();
    let ff = tfim_free_fermion_levels(n, 2.0, 1);
    for k in 0..n {
        let w = peak_weights(&spec, &op, k).unwrap();
        let (e, _) = w.iter().copied().max_by(|a, b| a.1.partial_cmp(&b.1).unwrap()).unwrap();
        let magnon = ff.iter().filter(|l| l.0 == k && l.1 > 1e-9).map(|l| l.1).fold(f64::INFINITY, f64::min);
        assert!((e - magnon).abs() < 1e-9, "k={k}: peak {e}, magnon {magnon}");
    }
}

#[test]
fn weight_ratio_matches_spectral_weight() {
    let spec = tfim(8);
    let op = parse_product::<f64>("sz0", spec.table.chain).unwrap();
    let k = 4;
    let w = peak_weights(&spec, &op, k).unwrap();
    let total: f64 = w.iter().map(|x| x.1).sum();
    let shifted = op.shifted(spec.ground_expectation(&op));
    let onorm = shifted.norm().unwrap();
    let (_, eig) = spec.sector(k).unwrap();
    let f = eig.overlaps(&spec.momentum_state(&op, k).unwrap())[0].norm() / onorm;
    assert!((w[0].1 / total - f * f * onorm * onorm / total).abs() < 1e-12);
}

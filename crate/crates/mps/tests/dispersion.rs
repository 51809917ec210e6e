use quasix_core::linalg::LanczosOptions;
use quasix_core::models::{aklt_bond, build_model, ModelKind};
use quasix_core::sector::{OrbitTable, SolveMode, Spectrum};
use quasix_mps::scan::{periodic_min, Fourier};
use quasix_mps::{aklt_tensor, continuum_edges, converge, dispersion_scan, BlockModel};

const PI: f64 = std::f64::consts::PI;

fn aklt_levels(ell: usize, p: f64, keep: usize) -> quasix_mps::Levels {
    let m = BlockModel::new(&aklt_tensor(), Some(&aklt_bond()), ell).unwrap();
    quasix_mps::scan::levels_at(&m, p, keep).unwrap()
}

#[test]
fn triplet_at_pi() {
    for ell in 1..=4 {
        let lv = aklt_levels(ell, PI, 6);
        assert_eq!(lv.degeneracy[0], 3, "l={ell}: {:?}", lv.levels());
        assert!(lv.hermiticity < 1e-10);
    }
    let e1 = aklt_levels(1, PI, 3).min();
    assert!((e1 - 10.0 / 27.0).abs() < 1e-12, "{e1}");
}

#[test]
fn block_length_is_variational() {
    let grid: Vec<f64> = (0..9).map(|j| j as f64 * PI / 8.0).collect();
    let bands = dispersion_scan(&aklt_tensor(), &aklt_bond(), &[1, 2, 3, 4], &grid, 1).unwrap();
    for w in bands.windows(2) {
        for (a, b) in w[0].emin().iter().zip(w[1].emin()) {
            assert!(b <= a + 1e-10, "l={}: {b} > {a}", w[1].ell);
        }
    }
}

#[test]
fn dispersion_is_even() {
    for ell in [1, 2, 3] {
        for p in [0.3, 1.2, 2.9] {
            let e = aklt_levels(ell, p, 1).min();
            let em = aklt_levels(ell, -p, 1).min();
            let e2 = aklt_levels(ell, 2.0 * PI - p, 1).min();
            assert!((e - em).abs() < 1e-9 && (e - e2).abs() < 1e-9, "l={ell} p={p}: {e} {em} {e2}");
        }
    }
}

#[test]
fn convergence_table_flags_slow_momentum() {
    let ps = [0.4 * PI, 0.6 * PI, 0.8 * PI, PI];
    let table = converge(&aklt_tensor(), &aklt_bond(), &ps, 4).unwrap();
    assert_eq!(table.rows.len(), 4);
    for row in &table.rows[1..] {
        assert!(row.diffs.iter().all(|&d| d > 0.0), "{row:?}");
        assert!(row.ratios.iter().all(|&r| r <= 0.9), "{row:?}");
    }
    assert_eq!(table.slowest, 0);
    assert!(table.rows[0].borderline);
}

#[test]
fn single_block_above_finite_chain_gap() {
    // lowest p = pi state of a 12-site ring from the sector solver
    let h = build_model::<f64>(ModelKind::Aklt, &[], 12).unwrap();
    let table = OrbitTable::new(h.chain).unwrap();
    let spec = Spectrum::solve_sectors(&h, table, &[6], SolveMode::LowestK(1), &LanczosOptions::default()).unwrap();
    let (_, sec) = spec.sector(6).unwrap();
    let ed = sec.energies[0];
    let e1 = aklt_levels(1, PI, 1).min();
    assert!(e1 >= ed - 5e-3, "{e1} vs {ed}");
    let e3 = aklt_levels(3, PI, 1).min();
    assert!((e3 - ed).abs() < 5e-3, "{e3} vs {ed}");
}

fn eps(k: f64) -> f64 {
    0.6 + 0.3 * (k).cos() + 0.1 * (2.0 * k).cos()
}

#[test]
fn fourier_reproduces_band_limited_samples() {
    let m = 32;
    let samples: Vec<f64> = (0..m).map(|j| eps(2.0 * PI * j as f64 / m as f64)).collect();
    let f = Fourier::new(&samples);
    for x in [0.1, 1.3, 2.7, 5.9] {
        assert!((f.eval(x) - eps(x)).abs() < 1e-12);
    }
    let (x, v) = periodic_min(|x| (x - 1.0).cos(), 16);
    assert!((x - (1.0 + PI)).abs() < 1e-6 && (v + 1.0).abs() < 1e-12);
}

#[test]
fn continuum_edges_against_exhaustive_grid() {
    let m = 32;
    let samples: Vec<f64> = (0..m).map(|j| eps(2.0 * PI * j as f64 / m as f64)).collect();
    let ps = [0.0, 0.5, 1.4, PI, 2.0 * PI - 1.4];
    let edges = continuum_edges(&samples, &ps);
    let fine = 4000;
    let ks: Vec<f64> = (0..fine).map(|i| 2.0 * PI * i as f64 / fine as f64).collect();
    let brute2 = |p: f64| ks.iter().map(|&k| eps(k) + eps(p - k)).fold(f64::INFINITY, f64::min);
    let emin = ks.iter().map(|&k| eps(k)).fold(f64::INFINITY, f64::min);
    for (i, &p) in ps.iter().enumerate() {
        assert!((edges.two[i] - brute2(p)).abs() < 1e-6, "p={p}: {} vs {}", edges.two[i], brute2(p));
        assert!(edges.two[i] <= brute2(p) + 1e-12);
        let coarse: Vec<f64> = (0..400).map(|i| 2.0 * PI * i as f64 / 400.0).collect();
        let brute3 = coarse.iter().map(|&k| brute2(p - k) + eps(k)).fold(f64::INFINITY, f64::min);
        assert!(edges.three[i] <= brute3 + 1e-12 && brute3 - edges.three[i] < 1e-3, "p={p}");
        assert!(edges.three[i] >= 3.0 * emin - 1e-12);
    }
    // minimum attained at opposite momenta k and -k
    assert!((edges.two[0] - 2.0 * emin).abs() < 1e-6);
    // even in p
    assert!((edges.two[2] - edges.two[4]).abs() < 1e-9);
    assert!((edges.three[2] - edges.three[4]).abs() < 1e-9);
}

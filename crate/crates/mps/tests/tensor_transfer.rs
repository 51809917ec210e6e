use proptest::prelude::*;
use quasix_core::linalg::{self, CMat};
use quasix_core::models::aklt_bond;
use quasix_core::ops::spin_matrices;
use quasix_core::scalar::{cr, C};
use quasix_mps::tensor::{bond_energy, row_mat, row_mat_col, site_operator_transfer, transpose_vec};
use quasix_mps::{aklt_tensor, transfer_fixed_points, MpsTensor};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_tensor(d: usize, bond: usize, seed: u64) -> MpsTensor<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = (0..d)
        .map(|_| CMat::<f64>::from_fn(bond, bond, |_, _| C::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))))
        .collect();
    MpsTensor::new(a).unwrap().normalized().unwrap()
}

fn as_matrix(v: &[C<f64>], dd: usize) -> CMat<f64> {
    CMat::<f64>::from_fn(dd, dd, |i, j| v[i * dd + j])
}

#[test]
fn aklt_transfer_spectrum() {
    let t = aklt_tensor::<f64>();
    assert_eq!((t.d, t.bond), (3, 2));
    let (vals, _) = linalg::eig(&t.transfer()).unwrap();
    let mut re: Vec<f64> = vals.iter().map(|z| z.re).collect();
    re.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let want = [1.0, -1.0 / 3.0, -1.0 / 3.0, -1.0 / 3.0];
    for (v, w) in vals.iter().zip(re.iter().zip(want)) {
        assert!(v.im.abs() < 1e-12);
        assert!((w.0 - w.1).abs() < 1e-12, "{re:?}");
    }
}

#[test]
fn aklt_fixed_points_are_identity() {
    let t = aklt_tensor::<f64>();
    let fp = transfer_fixed_points(&t).unwrap();
    let s = 0.5f64.sqrt();
    for (k, (l, r)) in fp.l.iter().zip(&fp.r).enumerate() {
        let want = if k % 3 == 0 { s } else { 0.0 };
        assert!((l - cr(want)).norm() < 1e-12 && (r - cr(want)).norm() < 1e-12, "{fp:?}");
    }
    assert!((fp.gap_ratio - 1.0 / 3.0).abs() < 1e-12);
}

#[test]
fn aklt_bond_energy_vanishes() {
    let t = aklt_tensor::<f64>();
    let fp = transfer_fixed_points(&t).unwrap();
    let e = bond_energy(&t, &fp, &aklt_bond::<f64>());
    assert!(e.norm() < 1e-14, "{e}");
    // sanity: the same contraction sees a nonzero operator
    let one = bond_energy(&t, &fp, &linalg::identity::<f64>(9));
    assert!((one - cr(1.0)).norm() < 1e-14);
}

#[test]
fn aklt_correlator_ratio() {
    let t = aklt_tensor::<f64>();
    let fp = transfer_fixed_points(&t).unwrap();
    let (_, _, sz) = spin_matrices::<f64>(3);
    let ez = site_operator_transfer(&t, &sz);
    let e = t.transfer();
    let mut left = row_mat(&fp.l, &ez);
    let mut last = None;
    for x in 1..8 {
        let c = row_mat_col(&left, &ez, &fp.r);
        if let Some(prev) = last {
            let ratio: C<f64> = c / prev;
            assert!((ratio - cr(-1.0 / 3.0)).norm() < 1e-10, "x={x}: {ratio}");
        } else {
            assert!((c - cr(-4.0 / 9.0)).norm() < 1e-12, "{c}");
        }
        last = Some(c);
        left = row_mat(&left, &e);
    }
}

#[test]
fn degenerate_dominant_eigenvalue_is_an_error() {
    let p0 = CMat::<f64>::from_fn(2, 2, |i, j| if i == 0 && j == 0 { cr(1.0) } else { cr(0.0) });
    let p1 = CMat::<f64>::from_fn(2, 2, |i, j| if i == 1 && j == 1 { cr(1.0) } else { cr(0.0) });
    let t = MpsTensor::new(vec![p0, p1]).unwrap();
    assert!(transfer_fixed_points(&t).is_err());
}

#[test]
fn random_tensor_fixed_points() {
    for (d, bond, seed) in [(2, 2, 3), (3, 2, 4), (2, 3, 5)] {
        let t = random_tensor(d, bond, seed);
        let fp = transfer_fixed_points(&t).unwrap();
        let e = t.transfer();
        let er = linalg::matvec(&e, &fp.r);
        let le = row_mat(&fp.l, &e);
        let dd = bond * bond;
        let res_r: f64 = er.iter().zip(&fp.r).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        let res_l: f64 = le.iter().zip(&fp.l).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(res_r < 1e-12 && res_l < 1e-12, "{res_r} {res_l}");
        let norm = fp.l.iter().zip(&fp.r).fold(cr(0.0), |s, (a, b)| s + a * b);
        assert!((norm - cr(1.0)).norm() < 1e-12);
        // positive definite
        let rm = as_matrix(&fp.r, bond);
        let lm = as_matrix(&transpose_vec(&fp.l, bond), bond);
        for m in [rm, lm] {
            assert!(linalg::hermiticity_residual(&m) < 1e-12);
            assert!(linalg::eigvalsh(&m).unwrap().iter().all(|&v| v > 0.0));
        }
        assert_eq!(fp.l.len(), dd);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn gauge_covariance(seed in 0u64..10_000, g in prop::collection::vec(-1.0f64..1.0, 8)) {
        let t = random_tensor(3, 2, seed);
        let gm = CMat::<f64>::from_fn(2, 2, |i, j| C::new(g[2 * i + j] + if i == j { 2.0 } else { 0.0 }, g[4 + 2 * i + j]));
        let tg = t.gauge(&gm);
        let fp = transfer_fixed_points(&t).unwrap();
        let fg = transfer_fixed_points(&tg).unwrap();
        // r -> G r G^dagger, l -> G^{-dagger} l G^{-1}, up to the shared normalization
        let r = as_matrix(&fp.r, 2);
        let want_r = linalg::mul(&linalg::mul(&gm, &r), &linalg::adjoint(&gm));
        let rg = as_matrix(&fg.r, 2);
        let scale = linalg::trace(&rg) / linalg::trace(&want_r);
        prop_assert!(linalg::max_abs(&linalg::sub(&rg, &linalg::scale(&want_r, scale))) < 1e-10);
        let gi = linalg::solve(&gm, &linalg::identity(2));
        let l = as_matrix(&transpose_vec(&fp.l, 2), 2);
        let want_l = linalg::mul(&linalg::mul(&linalg::adjoint(&gi), &l), &gi);
        let lg = as_matrix(&transpose_vec(&fg.l, 2), 2);
        let scale_l = linalg::trace(&lg) / linalg::trace(&want_l);
        prop_assert!(linalg::max_abs(&linalg::sub(&lg, &linalg::scale(&want_l, scale_l))) < 1e-10);
        let norm = fg.l.iter().zip(&fg.r).fold(cr(0.0), |s, (a, b)| s + a * b);
        prop_assert!((norm - cr(1.0)).norm() < 1e-12);
    }
}

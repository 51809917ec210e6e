use proptest::prelude::*;
use quasix_core::filter::{
    gaussian_filter, seminorm_prime, theorem_bound, truncated_filter, FilterLab, FilterSchedule, PipelineParams,
};
use quasix_core::linalg::{self, CMat};
use quasix_core::models::{build_model, lr_velocity, ModelKind};
use quasix_core::ops::parse_product;
use quasix_core::scalar::{cr, czero, erf, C};

fn tfim_lab(n: usize) -> FilterLab<f64> {
    FilterLab::new(build_model::<f64>(ModelKind::Tfim, &[2.0], n).unwrap()).unwrap()
}

#[test]
fn gaussian_factor_examples() {
    let e = vec![0.0, 1.0, 3.0];
    let o = CMat::<f64>::from_fn(3, 3, |_, _| cr(1.0));
    let same = gaussian_filter(&o, &e, 0.7, 0.0).unwrap();
    assert!(linalg::max_abs(&linalg::sub(&same, &o)) == 0.0);
    let g = gaussian_filter(&o, &e, 2.0, 2.0).unwrap();
    // E_t + E_n - E_m = 0 for (m, n) = (2, 1)
    assert!((g[(2, 1)].re - 1.0).abs() < 1e-15);
    // off-resonance 1 with q = 2
    let g1 = gaussian_filter(&o, &e, 0.0, 2.0).unwrap();
    assert!((g1[(1, 0)].re - (-1.0f64).exp()).abs() < 1e-15);
    assert!(gaussian_filter(&o, &e, 0.0, -1.0).is_err());
}

#[test]
fn commuting_operator_gets_erf_factor() {
    let e: Vec<f64> = vec![0.0, 0.4, 1.3, 2.2, 5.0];
    let o = CMat::<f64>::from_fn(5, 5, |i, j| if i == j { cr(e[i] + 0.5) } else { czero() });
    for (q, t) in [(0.5, 0.7), (1.0, 1.0), (2.0, 3.0)] {
        let o2 = truncated_filter(&o, &e, 0.0, q, t, None).unwrap();
        let kappa = erf(t / (2.0f64 * q).sqrt());
        let want = linalg::scale(&o, cr(kappa));
        assert!(linalg::max_abs(&linalg::sub(&o2.matrix, &want)) < 1e-12, "q={q} t={t}");
    }
}

#[test]
fn truncated_converges_to_gaussian() {
    let lab = tfim_lab(6);
    let op = parse_product::<f64>("sz0", lab.h.chain).unwrap();
    let target = lab.target(3, 0).unwrap();
    let prep = lab.prepare(&op, &target).unwrap();
    let q = 0.3;
    let o1 = gaussian_filter(&prep.o_eig, &lab.energies, target.energy, q).unwrap();
    let onorm = prep.norm;
    let mut last = 0.0;
    for (i, t) in [8.0 * q.sqrt(), 4.0 * q.sqrt(), 2.0 * q.sqrt(), q.sqrt()].into_iter().enumerate() {
        let o2 = truncated_filter(&prep.o_eig, &lab.energies, target.energy, q, t, None).unwrap();
        let gap = linalg::op_norm(&linalg::sub(&o2.matrix, &o1)).unwrap();
        if i == 0 {
            assert!(gap < 1e-12 * onorm, "{gap}");
        } else {
            assert!(gap > last, "halving T must widen the gap");
        }
        last = gap;
    }
}

#[test]
fn under_resolved_quadrature_is_an_error() {
    let e: Vec<f64> = (0..20).map(|i| i as f64).collect();
    let o = linalg::identity::<f64>(20);
    assert!(truncated_filter(&o, &e, 0.0, 4.0, 20.0, Some(4)).is_err());
    assert!(truncated_filter(&o, &e, 0.0, 4.0, 20.0, None).is_ok());
}

#[test]
fn seminorm_examples() {
    let s = 0.5f64.sqrt();
    assert_eq!(seminorm_prime(&[cr(1.0f64), czero(), czero()], 0), 0.0);
    assert!((seminorm_prime(&[czero(), cr(1.0f64), czero()], 0) - 1.0).abs() < 1e-15);
    assert!((seminorm_prime(&[cr(s), cr(s), czero()], 0) - s).abs() < 1e-15);
}

#[test]
fn theorem_bound_examples() {
    let (de, v) = (2.0, 10.0);
    let e = |l: usize| (-de * l as f64 / (2.0 * v)).exp();
    let b = theorem_bound(5, 1.0, de, v, 0.0, 0.0);
    assert!((b.value.unwrap() - (1.0 - e(5))).abs() < 1e-15);
    assert!(theorem_bound(2000, 0.3, de, v, 1.0, 1.0).value.unwrap() > 1.0 - 1e-12);
    // pick D_X so that the factor is exactly 1/2
    let (l0, f, c) = (40usize, 0.4, 1.0);
    let dx = (0.5 / e(l0) - c) * f;
    let b = theorem_bound(l0, f, de, v, dx, c);
    assert!((b.factor - 0.5).abs() < 1e-12 && b.ell0_ok);
    let want = 1.0 - 2.0 * (1.0 + c + dx) * e(l0) / f;
    assert!((b.value.unwrap() - want).abs() < 1e-12);
    let small = theorem_bound(1, 0.1, de, v, 5.0, 1.0);
    assert!(small.value.is_none() && !small.ell0_ok);
}

#[test]
fn target_preserved_and_off_target_suppressed() {
    for n in [8, 10] {
        let lab = tfim_lab(n);
        for (opname, k) in [("sz0", n / 2), ("sz0*sx1", 1), ("sx2", 0)] {
            let op = parse_product::<f64>(opname, lab.h.chain).unwrap();
            let target = lab.target(k, if k == 0 { 1 } else { 0 }).unwrap();
            let prep = lab.prepare(&op, &target).unwrap();
            let (_, eig) = lab.spectrum.sector(k).unwrap();
            let before = eig.overlaps(&lab.filtered_state(&prep.o_eig, k).unwrap());
            for q in [0.1, 1.0, 3.0] {
                let o1 = gaussian_filter(&prep.o_eig, &lab.energies, target.energy, q).unwrap();
                let after = eig.overlaps(&lab.filtered_state(&o1, k).unwrap());
                assert!((after[target.alpha] - before[target.alpha]).norm() < 1e-12, "{opname} n={n}");
                let supp = (-q * target.delta_e * target.delta_e / 2.0).exp();
                for b in 0..after.len() {
                    if b != target.alpha {
                        assert!(after[b].norm() <= supp * before[b].norm() + 1e-14, "{opname} n={n} b={b}");
                    }
                }
                // Parseval and the seminorm decomposition
                let total: f64 = linalg::norm(&lab.filtered_state(&o1, k).unwrap());
                let sn = seminorm_prime(&after, target.alpha);
                assert!((sn * sn + after[target.alpha].norm_sqr() - total * total).abs() < 1e-10);
            }
        }
    }
}

#[test]
fn pipeline_report_is_consistent() {
    let lab = tfim_lab(8);
    let op = parse_product::<f64>("sz0", lab.h.chain).unwrap();
    let target = lab.target(4, 0).unwrap();
    let params = PipelineParams::default();
    let scan = lab.scan(&op, &target, 3, &params).unwrap();
    assert!(scan.f > 0.1);
    assert!(!scan.bound_flag);
    for r in &scan.reports {
        assert!((0.0..=1.0 + 1e-12).contains(&r.fidelity));
        assert!((r.seminorm.powi(2) + r.overlap.powi(2) - r.norm.powi(2)).abs() < 1e-10);
        assert!(r.loc_error <= r.loc_bound, "l={} {} > {}", r.ell, r.loc_error, r.loc_bound);
        assert!(r.loc_error_op <= r.loc_error * (1.0 + 1e-9));
        assert!(r.t > 0.0 && r.q > 0.0);
    }
    let over = PipelineParams { delta_e: Some(10.0 * target.delta_e), ..params };
    let scan = lab.scan(&op, &target, 1, &over).unwrap();
    assert!(scan.bound_flag && scan.delta_e_overstated);
}

#[test]
fn f32_pipeline_runs() {
    let h = build_model::<f32>(ModelKind::Tfim, &[2.0], 6).unwrap();
    let lab = FilterLab::new(h).unwrap();
    let op = parse_product::<f32>("sz0", lab.h.chain).unwrap();
    let target = lab.target(3, 0).unwrap();
    let prep = lab.prepare(&op, &target).unwrap();
    let o1 = gaussian_filter(&prep.o_eig, &lab.energies, target.energy, 0.5f32).unwrap();
    let s = lab.filtered_state(&o1, 3).unwrap();
    assert!(linalg::norm(&s) > 0.0);
    let _: C<f32> = s[0];
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn schedule_invariants(ell in 1usize..40, de in 0.1f64..5.0, mu in 0.2f64..2.0, s in 0.5f64..20.0) {
        let sch = FilterSchedule::new(ell, de, mu, s, 1.0).unwrap();
        prop_assert!(sch.t > 0.0 && sch.q > 0.0);
        prop_assert!((sch.v_lr - lr_velocity(de, s, mu)).abs() < 1e-12);
        prop_assert!((sch.t - ell as f64 / sch.v_lr).abs() < 1e-12);
        prop_assert!((sch.q - sch.t / de).abs() < 1e-12);
    }

    #[test]
    fn bound_increases_with_ell(f in 0.05f64..1.0, dx in 0.0f64..5.0, c in 0.0f64..1.0) {
        let mut last = f64::NEG_INFINITY;
        for ell in (200..2000).step_by(100) {
            let b = theorem_bound(ell, f, 2.0, 5.0, dx, c);
            let v = b.value.unwrap();
            prop_assert!(v >= last - 1e-15 && v <= 1.0);
            last = v;
        }
    }
}

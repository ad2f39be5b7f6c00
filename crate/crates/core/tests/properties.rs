use nonlocal_perimeter::geometry::*;
use nonlocal_perimeter::measures::*;
use nonlocal_perimeter::perimeter::*;
use proptest::prelude::*;

fn union() -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((0.01f64..1.0, 0.01f64..1.0), 1..6).prop_map(|parts| {
        let mut x = -1.0;
        parts
            .into_iter()
            .map(|(gap, len)| {
                x += gap;
                let iv = (x, x + len);
                x += len;
                iv
            })
            .collect()
    })
}

fn shape() -> impl Strategy<Value = SetGeometry> {
    prop_oneof![
        union().prop_map(|v| SetGeometry::Intervals(IntervalUnion::new(v).unwrap())),
        (0.2f64..2.0, 0.2f64..2.0).prop_map(|(w, h)| SetGeometry::Shape(AnalyticShape::rect([0.0, 0.0], [w, h]))),
        (0.2f64..1.5).prop_map(|r| SetGeometry::Shape(AnalyticShape::disk([0.0, 0.0], r))),
    ]
}

fn scaled(set: &SetGeometry, s: f64) -> SetGeometry {
    match set {
        SetGeometry::Intervals(e) => SetGeometry::Intervals(e.scaled(s).unwrap()),
        SetGeometry::Shape(AnalyticShape::Ball { center, radius }) => SetGeometry::Shape(AnalyticShape::ball(center.iter().map(|c| c * s).collect(), radius * s).unwrap()),
        SetGeometry::Shape(AnalyticShape::Box { lo, hi }) => {
            SetGeometry::Shape(AnalyticShape::boxed(lo.iter().map(|c| c * s).collect(), hi.iter().map(|c| c * s).collect()).unwrap())
        }
        _ => unreachable!(),
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 100, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn shifted_loss_matches_overlap(v in union(), r in -4.0f64..4.0) {
        let total: f64 = v.iter().map(|(a, b)| b - a).sum();
        let want = total - shifted_overlap(&v, &v, r);
        prop_assert!((shifted_loss(&v, r) - want).abs() < 1e-12);
    }

    #[test]
    fn stable_measures_scale(set in shape(), alpha in 0.1f64..0.9, s in 0.3f64..3.0) {
        let q = QuadratureSpec::with_tol(1e-9);
        let d = set.dim();
        let m = MeasureSpec::fractional(d, alpha).unwrap();
        let a = per_nu_set(&set, &m, &q).unwrap().value;
        let b = per_nu_set(&scaled(&set, s), &m, &q).unwrap().value;
        let want = s.powf(d as f64 - alpha) * a;
        prop_assert!((b - want).abs() < 1e-7 * want, "{} vs {}", b, want);
    }

    #[test]
    fn first_moment_bound(set in shape(), kind in 0u8..2, len in 0.05f64..2.0) {
        let q = QuadratureSpec::with_tol(1e-9);
        let d = set.dim();
        let k = if kind == 0 { Kernel::gaussian(d, len).unwrap() } else { Kernel::indicator_ball(d, len).unwrap() };
        let m = MeasureSpec::kernel(k);
        let p = per_nu_set(&set, &m, &q).unwrap().value;
        let bound = m.moment(1, 0.0, f64::INFINITY).unwrap() * classical_perimeter(&set);
        prop_assert!(p <= bound * (1.0 + 1e-9), "{} > {}", p, bound);
    }

    #[test]
    fn larger_kernel_support_larger_perimeter(set in shape(), r1 in 0.05f64..2.0, grow in 1.0f64..3.0) {
        let q = QuadratureSpec::with_tol(1e-9);
        let d = set.dim();
        let small = per_nu_set(&set, &MeasureSpec::kernel(Kernel::indicator_ball(d, r1).unwrap()), &q).unwrap();
        let large = per_nu_set(&set, &MeasureSpec::kernel(Kernel::indicator_ball(d, r1 * grow).unwrap()), &q).unwrap();
        prop_assert!(small.value <= large.value + small.err + large.err);
    }

    #[test]
    fn reflection_invariance(v in union(), alpha in 0.05f64..0.95) {
        let q = QuadratureSpec::with_tol(1e-10);
        let e = IntervalUnion::new(v.clone()).unwrap();
        let mirrored = IntervalUnion::new(v.iter().map(|&(a, b)| (-b, -a)).collect()).unwrap();
        let m = MeasureSpec::fractional(1, alpha).unwrap();
        let a = per_nu_set(&SetGeometry::Intervals(e), &m, &q).unwrap().value;
        let b = per_nu_set(&SetGeometry::Intervals(mirrored), &m, &q).unwrap().value;
        prop_assert!((a - b).abs() <= 1e-12 * a);
    }

    #[test]
    fn f_nu_is_absolutely_homogeneous(vals in prop::collection::vec(-3.0f64..3.0, 12), c in -4.0f64..4.0) {
        prop_assume!(vals.iter().any(|v| *v != 0.0) && c != 0.0);
        let q = QuadratureSpec::with_tol(1e-10);
        let m = MeasureSpec::fractional(2, 0.5).unwrap();
        let u = GridFunction::new(2, &[4, 3], 0.25, &[0.0, 0.0], vals.clone()).unwrap();
        let cu = GridFunction::new(2, &[4, 3], 0.25, &[0.0, 0.0], vals.iter().map(|v| c * v).collect()).unwrap();
        let a = f_nu(&u, &m, &q).unwrap().value;
        let b = f_nu(&cu, &m, &q).unwrap().value;
        prop_assert!((b - c.abs() * a).abs() <= 1e-9 * b.abs());
    }

    #[test]
    fn voxel_files_round_trip(bits in prop::collection::vec(any::<bool>(), 16), h in 0.01f64..1.0, ox in -5.0f64..5.0) {
        prop_assume!(bits.iter().any(|b| *b));
        let mut mask = vec![0u8; 36];
        for (k, b) in bits.iter().enumerate() {
            if *b {
                mask[(k % 4 + 1) + 6 * (k / 4 + 1)] = 1;
            }
        }
        let v = VoxelSet::new(2, &[6, 6], h, &[ox, 0.5], mask).unwrap();
        let back = VoxelSet::from_bytes(&v.to_bytes()).unwrap();
        prop_assert_eq!(v, back);
    }
}

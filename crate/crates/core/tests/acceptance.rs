//! Acceptance run: one PASS/FAIL line per criterion.
//!
//! Criteria listed in `KNOWN_RED` are reported as FAIL like any other but do
//! not fail the process; every other failure does.

use nonlocal_perimeter::asymptotics::*;
use nonlocal_perimeter::constants::{ball_volume, sphere_area};
use nonlocal_perimeter::convex::{perimeter_wrt_moment_body, ConvexBody};
use nonlocal_perimeter::geometry::*;
use nonlocal_perimeter::measures::*;
use nonlocal_perimeter::perimeter::*;
use nonlocal_perimeter::Error;
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestCaseError, TestRng, TestRunner};
use std::f64::consts::PI;
use std::time::Instant;

const KNOWN_RED: &[u32] = &[8];
const CASES: u32 = 128;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn unit_interval() -> SetGeometry {
    SetGeometry::Intervals(IntervalUnion::single(0.0, 1.0).unwrap())
}

fn unit_disk() -> SetGeometry {
    SetGeometry::Shape(AnalyticShape::disk([0.0, 0.0], 1.0))
}

// 1. P_α([0,1]) = 2/(α(1-α)), by quadrature and by Monte Carlo.
fn criterion_1() -> Outcome {
    let q = QuadratureSpec::default();
    let mut ok = true;
    let mut worst_rel = 0.0f64;
    let mut worst_z = 0.0f64;
    for (i, a) in [0.1, 0.25, 0.5, 0.75, 0.9].into_iter().enumerate() {
        let exact = 2.0 / (a * (1.0 - a));
        let p = frac_perimeter(&unit_interval(), a, &q).unwrap();
        worst_rel = worst_rel.max(rel(p.value, exact));
        // |y|^{-1-α} dy on the line: prefactor 2 against the normalized S^0
        let m = MeasureSpec::stable(1, a, 2.0).unwrap();
        let mc = per_nu_mc_oracle(&unit_interval(), &m, McOptions { samples: 1_000_000, seed: 100 + i as u64 }).unwrap();
        let z = (mc.value - exact).abs() / mc.err;
        worst_z = worst_z.max(z);
        ok &= rel(p.value, exact) < 1e-6 && z < 3.0;
    }
    // endpoints: (1-α)P_α → K_{1,1}/2 · Per = 2, α P_α → κ_0 |E| = 2
    let up = frac_perimeter(&unit_interval(), 0.999, &q).unwrap().value * 0.001;
    let down = frac_perimeter(&unit_interval(), 0.001, &q).unwrap().value * 0.001;
    let ends = rel(up, 2.0) < 2e-3 && rel(down, 2.0) < 2e-3;
    outcome(ok && ends, format!("max rel err {worst_rel:.2e} (tol 1e-6), max MC z {worst_z:.2} (tol 3), (1-a)P at a=0.999 {up:.5}, aP at a=0.001 {down:.5} (both -> 2)"))
}

fn report_sweep(r: &SweepResult, scale: f64, expected: f64, tol: f64) -> (bool, String) {
    let Some(ex) = &r.extrapolation else {
        return (false, "no extrapolation".into());
    };
    let value = ex.limit * scale;
    let e = rel(value, expected);
    let pass = e < tol && r.gate.passed && r.residual_decreases;
    (pass, format!("limit {value:.5} vs {expected:.5}, rel {e:.2e} (tol {tol}), residual decreasing {}", r.residual_decreases))
}

fn alpha_sweep(dir: AlphaDirection, set: SetGeometry, regime: Regime) -> SweepResult {
    let norm = match dir {
        AlphaDirection::AlphaUp => Normalization::AlphaUp,
        AlphaDirection::AlphaDown => Normalization::AlphaDown,
    };
    let fam = ScalingFamily::new(MeasureSpec::stable(2, 0.5, 1.0).unwrap(), ScalingRule::AlphaFamily { alpha_weighted: false }, norm).unwrap();
    sweep(&fam, &Payload::new(set), regime, &default_alpha_grid(dir), &SweepOptions::default()).unwrap()
}

fn sweeps() -> Vec<(u32, SweepResult)> {
    let opts = SweepOptions::default();
    let gauss = ScalingFamily::new(MeasureSpec::kernel(Kernel::gaussian(2, 1.0).unwrap()), ScalingRule::KernelShrink, Normalization::CapAtR(f64::INFINITY)).unwrap();
    let slow = ScalingFamily::new(MeasureSpec::kernel(Kernel::inverse_power(2, 2.0, 1.0).unwrap()), ScalingRule::KernelStretch, Normalization::BaseTail).unwrap();
    let eps = geometric_grid(0.1, 1e-3, 6);
    vec![
        (2, alpha_sweep(AlphaDirection::AlphaUp, unit_square(), Regime::ClassicalUniform)),
        (3, alpha_sweep(AlphaDirection::AlphaDown, unit_disk(), Regime::Lebesgue)),
        (4, sweep(&gauss, &Payload::new(unit_square()), Regime::JKernel, &eps, &opts).unwrap()),
        (5, sweep(&slow, &Payload::new(unit_disk()), Regime::Lebesgue, &eps, &opts).unwrap()),
        (6, aniso_sweep(&ConvexBody::unit_ball(2).unwrap(), &unit_square(), AlphaDirection::AlphaUp, &default_alpha_grid(AlphaDirection::AlphaUp), &opts).unwrap()),
        (7, aniso_sweep(&ConvexBody::boxed(vec![1.0, 1.0]).unwrap(), &unit_square(), AlphaDirection::AlphaDown, &default_alpha_grid(AlphaDirection::AlphaDown), &opts).unwrap()),
    ]
}

fn sweep_criterion(n: u32, r: &SweepResult) -> Outcome {
    let kappa = sphere_area(2);
    let (pass, detail) = match n {
        // (1-α)P_α = κ (1-α) Per_ν for ν = r^{-1-α}dr ⊗ normalized σ; limit ϖ_1 Per = 8
        2 => report_sweep(r, kappa, ball_volume(1) * 4.0, 0.02),
        // α P_α → κ_1 |E| = 2π·π
        3 => report_sweep(r, kappa, 2.0 * PI * PI, 0.02),
        // ε^{-1} Per_{J_ε} → ½ Per ∫ J(z)|z_1| dz = 2 E|Z_1| = 2√(2/π)
        4 => report_sweep(r, 1.0, 1.5957691216057308, 0.02),
        5 => report_sweep(r, 1.0, PI, 0.02),
        6 => {
            let sq = AnalyticShape::rect([0.0, 0.0], [1.0, 1.0]);
            let zk = perimeter_wrt_moment_body(&sq, &ConvexBody::unit_ball(2).unwrap(), 1e-10).unwrap();
            let (p, d) = report_sweep(r, 1.0, 8.0, 0.03);
            (p && rel(zk, 8.0) < 1e-8, format!("{d}, Per(E,ZK) computed {zk:.8}"))
        }
        7 => report_sweep(r, 1.0, 8.0, 0.03),
        _ => unreachable!(),
    };
    outcome(pass, detail)
}

// 8. Truncated dyadic set against its closed form, and growth as α ↑ 1.
fn criterion_8() -> Outcome {
    let q = QuadratureSpec::with_tol(1e-10);
    let set = SetGeometry::Intervals(IntervalUnion::dyadic(DYADIC_N_MAX));
    let mut worst = 0.0f64;
    let mut parts = Vec::new();
    for a in [0.3, 0.5, 0.7] {
        // ν_α = α|x|^{-1-α}dx/2
        let direct = per_nu_set(&set, &MeasureSpec::stable(1, a, a).unwrap(), &q).unwrap().value;
        let closed = dyadic_per_nu(a, &q).unwrap().value;
        worst = worst.max(rel(direct, closed));
        parts.push(format!("a={a}: {direct:.6} vs {closed:.6}"));
    }
    let study = dyadic_divergence_study(&[0.5, 0.9, 0.99], None, &QuadratureSpec::default()).unwrap();
    let pass = worst < 1e-6 && study.strictly_increasing;
    let vals: Vec<String> = study.alpha_rows.iter().map(|(a, v)| format!("{a}:{v:.3}")).collect();
    outcome(pass, format!("{} (max rel {worst:.2e}, tol 1e-6); increasing {} [{}]", parts.join(", "), study.strictly_increasing, vals.join(" ")))
}

fn runner() -> TestRunner {
    let cfg = Config { cases: CASES, failure_persistence: None, ..Config::default() };
    TestRunner::new_with_rng(cfg, TestRng::deterministic_rng(RngAlgorithm::ChaCha))
}

fn run_suite<S: Strategy>(name: &str, strategy: S, test: impl Fn(S::Value) -> Result<(), TestCaseError>) -> (bool, String)
where
    S::Value: std::fmt::Debug,
{
    match runner().run(&strategy, test) {
        Ok(()) => (true, format!("{name} ok")),
        Err(e) => (false, format!("{name} FAILED: {e}")),
    }
}

fn intervals_strategy() -> impl Strategy<Value = IntervalUnion> {
    prop::collection::vec((0.05f64..1.5, 0.05f64..1.5), 1..5).prop_map(|parts| {
        let mut x = 0.0;
        let mut v = Vec::new();
        for (gap, len) in parts {
            x += gap;
            v.push((x, x + len));
            x += len;
        }
        IntervalUnion::new(v).unwrap()
    })
}

/// Kernel measure with a finite interaction range: (kind, length).
fn kernel_measure(d: usize, kind: u8, length: f64) -> (MeasureSpec, f64) {
    let k = match kind {
        0 => Kernel::gaussian(d, length).unwrap(),
        1 => Kernel::indicator_ball(d, length).unwrap(),
        _ => Kernel::inverse_power(d, 0.5 * d as f64, length).unwrap(),
    };
    // beyond this the kernel carries no mass worth 1e-15 of the total
    let reach = if kind == 0 { 9.0 * length } else { length };
    (MeasureSpec::kernel(k), reach)
}

fn complement_symmetry() -> (bool, String) {
    let q = QuadratureSpec::with_tol(1e-8);
    run_suite("complement symmetry", (intervals_strategy(), 0u8..3, 0.1f64..2.0), |(e, kind, len)| {
        let (m, reach) = kernel_measure(1, kind, len);
        let (a, b) = e.bounds();
        let margin = reach + 1.0;
        let r = symmetry_check(&SetGeometry::Intervals(e), &m, &[a - margin], &[b + margin], &q).map_err(|x| TestCaseError::fail(x.to_string()))?;
        prop_assert!(!r.inconclusive);
        prop_assert!(r.gap <= q.rel_tol * r.lhs, "gap {} lhs {}", r.gap, r.lhs);
        Ok(())
    })
}

fn grid_function_strategy() -> impl Strategy<Value = GridFunction> {
    (1usize..=2, 1usize..=4, 1usize..=4, 0.1f64..0.5).prop_flat_map(|(d, nx, ny, h)| {
        let ny = if d == 1 { 1 } else { ny };
        let levels = [-2.0, -1.0, -0.5, 0.0, 0.5, 1.0, 2.0, 3.0];
        prop::collection::vec(prop::sample::select(levels.to_vec()), nx * ny).prop_filter_map("nonzero", move |vals| {
            if vals.iter().all(|&v| v == 0.0) {
                return None;
            }
            let dims: Vec<usize> = if d == 1 { vec![nx] } else { vec![nx, ny] };
            Some(GridFunction::new(d, &dims, h, &vec![0.0; d], vals).unwrap())
        })
    })
}

fn coarea() -> (bool, String) {
    let q = QuadratureSpec::with_tol(1e-10);
    run_suite("co-area", (grid_function_strategy(), 0u8..2, 0.1f64..0.9), |(u, kind, p)| {
        let m = if kind == 0 { MeasureSpec::fractional(u.dim(), p).unwrap() } else { MeasureSpec::kernel(Kernel::gaussian(u.dim(), p).unwrap()) };
        let a = f_nu(&u, &m, &q).unwrap().value;
        let b = coarea_rhs(&u, &m, &q).unwrap().value;
        prop_assert!((a - b).abs() <= 1e-8 * a.abs(), "{} vs {}", a, b);
        Ok(())
    })
}

fn shape_strategy() -> impl Strategy<Value = SetGeometry> {
    prop_oneof![
        intervals_strategy().prop_map(SetGeometry::Intervals),
        (0.1f64..3.0, 0.1f64..3.0).prop_map(|(w, h)| SetGeometry::Shape(AnalyticShape::rect([0.0, 0.0], [w, h]))),
        (0.1f64..2.0).prop_map(|r| SetGeometry::Shape(AnalyticShape::disk([0.3, -0.2], r))),
    ]
}

fn upper_bound() -> (bool, String) {
    let q = QuadratureSpec::with_tol(1e-8);
    run_suite("upper bound", (shape_strategy(), 0u8..4, 0.05f64..0.95, 0.1f64..3.0), |(set, kind, a, c)| {
        let d = set.dim();
        let m = if kind == 3 { MeasureSpec::stable(d, a, c).unwrap() } else { kernel_measure(d, kind, c).0 };
        let per = per_nu_set(&set, &m, &q).unwrap().value;
        let cnu = m.capped_integral(1.0).unwrap();
        let bound = cnu * (classical_perimeter(&set) + set.volume());
        prop_assert!(per <= bound * (1.0 + 1e-9), "{} > {}", per, bound);
        Ok(())
    })
}

fn equal_area_shapes() -> [(&'static str, SetGeometry); 4] {
    let r = 1.0 / PI.sqrt();
    let s = 1.0 / 3f64.sqrt();
    let (w, h) = (2f64.sqrt(), 1.0 / 2f64.sqrt());
    let l = AnalyticShape::polygon(vec![[0.0, 0.0], [2.0 * s, 0.0], [2.0 * s, s], [s, s], [s, 2.0 * s], [0.0, 2.0 * s]]).unwrap();
    [
        ("disk", SetGeometry::Shape(AnalyticShape::disk([0.0, 0.0], r))),
        ("square", SetGeometry::Shape(AnalyticShape::rect([0.0, 0.0], [1.0, 1.0]))),
        ("rectangle", SetGeometry::Shape(AnalyticShape::rect([0.0, 0.0], [w, h]))),
        ("L", SetGeometry::Shape(l)),
    ]
}

fn isoperimetric() -> (bool, String) {
    let q = QuadratureSpec::with_tol(1e-9);
    let shapes = equal_area_shapes();
    run_suite("isoperimetric ordering", (0u8..3, 0.02f64..3.0), |(kind, len)| {
        let m = match kind {
            0 => MeasureSpec::kernel(Kernel::gaussian(2, len).unwrap()),
            1 => MeasureSpec::kernel(Kernel::indicator_ball(2, len).unwrap()),
            _ => MeasureSpec::kernel(Kernel::inverse_power(2, 1.0, len).unwrap()),
        };
        let v: Vec<PerimeterResult> = shapes.iter().map(|(_, s)| per_nu_set(s, &m, &q).unwrap()).collect();
        for (i, (name, _)) in shapes.iter().enumerate().skip(1) {
            // shapes tie once the kernel reaches past every diameter; allow the reported errors
            prop_assert!(v[0].value <= v[i].value + v[0].err + v[i].err, "disk {:?} > {} {:?}", v[0], name, v[i]);
        }
        Ok(())
    })
}

fn voxel_strategy() -> impl Strategy<Value = VoxelSet> {
    (1usize..=3, 1usize..=6, 1usize..=6, 1usize..=4, 0.05f64..0.5).prop_flat_map(|(d, a, b, c, h)| {
        let inner = [a, if d >= 2 { b } else { 1 }, if d >= 3 { c } else { 1 }];
        prop::collection::vec(any::<bool>(), inner.iter().product::<usize>()).prop_filter_map("nonempty", move |bits| {
            if !bits.iter().any(|&x| x) {
                return None;
            }
            let n: Vec<usize> = (0..d).map(|i| inner[i] + 2).collect();
            let mut full = [1usize; 3];
            full[..d].copy_from_slice(&n);
            let mut mask = vec![0u8; full.iter().product()];
            let off = |i: usize| if i < d { 1 } else { 0 };
            for k in 0..inner[2] {
                for j in 0..inner[1] {
                    for i in 0..inner[0] {
                        if bits[i + inner[0] * (j + inner[1] * k)] {
                            mask[i + off(0) + full[0] * (j + off(1) + full[1] * (k + off(2)))] = 1;
                        }
                    }
                }
            }
            Some(VoxelSet::new(d, &n, h, &vec![0.0; d], mask).unwrap())
        })
    })
}

fn translation() -> (bool, String) {
    let q = QuadratureSpec::with_tol(1e-8);
    run_suite("translation invariance", (voxel_strategy(), prop::collection::vec(-50.0f64..50.0, 3), 0u8..2, 0.1f64..0.9), |(v, shift, kind, p)| {
        let d = v.dim();
        let m = if kind == 0 { MeasureSpec::fractional(d, p).unwrap() } else { MeasureSpec::kernel(Kernel::gaussian(d, p).unwrap()) };
        let a = per_nu_set(&SetGeometry::Voxels(v.clone()), &m, &q).unwrap();
        let b = per_nu_set(&SetGeometry::Voxels(v.translated(&shift[..d]).unwrap()), &m, &q).unwrap();
        prop_assert_eq!(a.value.to_bits(), b.value.to_bits());
        prop_assert_eq!(a.err.to_bits(), b.err.to_bits());
        Ok(())
    })
}

fn criterion_9() -> Outcome {
    let suites = [complement_symmetry(), coarea(), upper_bound(), isoperimetric(), translation()];
    let pass = suites.iter().all(|s| s.0);
    let detail: Vec<String> = suites.into_iter().map(|s| s.1).collect();
    outcome(pass, format!("{} cases each: {}", CASES, detail.join("; ")))
}

// 10. Gates ran and passed for every sweep, and a sweep run in the wrong
// direction is refused before any evaluation.
fn criterion_10(results: &[(u32, SweepResult)]) -> Outcome {
    let mut parts = Vec::new();
    let mut pass = true;
    for (n, r) in results {
        let want = r.target.regime.lambda_limit();
        let ok = r.gate.passed && r.gate.expected == want && r.gate.radii == [0.1, 1.0, 10.0];
        pass &= ok;
        let last: Vec<String> = r.gate.last.iter().map(|x| format!("{x:.3}")).collect();
        parts.push(format!("#{n} ->{want} [{}]", last.join(",")));
    }
    let fam = ScalingFamily::new(MeasureSpec::stable(2, 0.5, 1.0).unwrap(), ScalingRule::AlphaFamily { alpha_weighted: false }, Normalization::AlphaUp).unwrap();
    let wrong = sweep(&fam, &Payload::new(unit_square()), Regime::Lebesgue, &default_alpha_grid(AlphaDirection::AlphaUp), &SweepOptions::default());
    let refused = matches!(wrong, Err(Error::HypothesisViolated(_)));
    outcome(pass && refused, format!("{}; mismatched regime refused {refused}", parts.join(" ")))
}

fn main() {
    let mut lines = Vec::new();
    let mut record = |n: u32, t: Instant, o: Outcome| {
        let secs = t.elapsed().as_secs_f64();
        let tag = if o.pass { "PASS" } else { "FAIL" };
        println!("criterion {n:>2}: {tag} [{secs:.1}s] {}", o.detail);
        lines.push((n, o.pass));
    };

    let t = Instant::now();
    record(1, t, criterion_1());

    let t = Instant::now();
    let results = sweeps();
    let sweep_time = t.elapsed();
    for (n, r) in &results {
        let t = Instant::now() - sweep_time / results.len() as u32;
        record(*n, t, sweep_criterion(*n, r));
    }

    let t = Instant::now();
    record(8, t, criterion_8());
    let t = Instant::now();
    record(9, t, criterion_9());
    let t = Instant::now();
    record(10, t, criterion_10(&results));

    let unexpected: Vec<u32> = lines.iter().filter(|(n, p)| !p && !KNOWN_RED.contains(n)).map(|(n, _)| *n).collect();
    let passed = lines.iter().filter(|(_, p)| *p).count();
    println!("acceptance: {passed}/{} criteria pass; known red: {:?}", lines.len(), KNOWN_RED);
    if !unexpected.is_empty() {
        println!("acceptance: unexpected failures {unexpected:?}");
        std::process::exit(1);
    }
}

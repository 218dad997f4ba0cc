//! Acceptance suite: one test per criterion, each printing a PASS line with
//! the measured numbers (run with `cargo test --test acceptance -- --nocapture`
//! to see them). Thresholds are frozen; statistical ones were pinned from
//! the calibration runs in `examples/calibrate.rs` before the assertions
//! were committed.

mod common;

use common::*;
use rigidity_core::circle::ExpandingCircleMap;
use rigidity_core::circle::RandomCircleSystem;
use rigidity_core::cocycle::{
    certify_cone_hyperbolic, is_generic_automorphism, lyapunov_spectrum_qr, top_lyapunov,
    ConePair, IntMatrix, MatrixFamily,
};
use rigidity_core::rigidity::{conjugated_system, degree_bound, rigidity_pipeline};
use rigidity_core::torus::{
    conjugacy_residual, conjugate_map_grid, solve_linear_conjugacy, srb_exponents,
    stable_bundle_dispersion, unstable_direction, verify_translation, ConjugacyGrid,
    RandomToralSystem,
};
use rigidity_core::transfer::{
    build_annealed_ulam, lyapunov_birkhoff, lyapunov_quadrature, stationary_density,
    ExponentEstimate,
};
use rigidity_core::{circ_dist, frac, ExponentEstimate as Estimate64};
use std::time::Instant;

#[test]
fn criterion_1_circle_exactness() {
    let t0 = Instant::now();
    let sys = RandomCircleSystem::single(ExpandingCircleMap::affine(2, 0.0).unwrap()).unwrap();
    let op = build_annealed_ulam(&sys, 4096, 24).unwrap();
    let q = stationary_density(&op, 1e-10, 50_000).unwrap();
    let quad = lyapunov_quadrature(&sys, &q);
    assert!((quad.value - LN2).abs() < 1e-6, "quadrature {}", quad.value);

    let bk = lyapunov_birkhoff(&sys, 1, 8, 125_000, 1_000).unwrap(); // 1e6 total steps
    assert!(bk.stderr < 2e-4, "stderr {}", bk.stderr);
    assert!((bk.value - LN2).abs() <= 3.0 * bk.stderr + 1e-12, "birkhoff {}", bk.value);
    let dt = t0.elapsed().as_secs_f64();
    assert!(dt < 10.0, "runtime {dt:.1}s exceeds 10s");
    println!(
        "ACCEPTANCE 1 (circle exactness): PASS - quad err {:.2e}, birkhoff err {:.2e}, stderr {:.2e}, {:.2}s",
        (quad.value - LN2).abs(),
        (bk.value - LN2).abs(),
        bk.stderr,
        dt
    );
}

#[test]
fn criterion_2_degree_bound_inequality() {
    let t0 = Instant::now();
    // 50 seeded random certified systems: defect >= -(3 stderr + 5e-3)
    let mut worst = f64::INFINITY;
    for i in 0..50 {
        let sys = random_certified_system(777, i);
        assert!(sys.min_margin() >= 0.1, "system {i} margin {}", sys.min_margin());
        let est = lyapunov_birkhoff(&sys, 1000 + i, 8, 20_000, 500).unwrap();
        let defect = degree_bound(&sys) - est.value;
        let slack = 3.0 * est.stderr + 5e-3;
        assert!(defect >= -slack, "system {i}: defect {defect} below -{slack}");
        worst = worst.min(defect + slack);
    }

    // pre-registered perturbed system: the defect is decisive
    let sys = registered_circle_system();
    let op = build_annealed_ulam(&sys, 8192, 24).unwrap();
    let q = stationary_density(&op, 1e-10, 50_000).unwrap();
    let quad = lyapunov_quadrature(&sys, &q);
    let defect = degree_bound(&sys) - quad.value;
    assert!(defect > 1e-2, "registered defect {defect}");
    // cross-estimator agreement within 3 (stderr + C/n_bins), C frozen at 12
    let bk = lyapunov_birkhoff(&sys, 2024, 16, 62_500, 1_000).unwrap();
    let tol = 3.0 * (bk.stderr + 12.0 / 8192.0);
    assert!((bk.value - quad.value).abs() < tol, "estimators disagree: {} vs {}", bk.value, quad.value);
    let dt = t0.elapsed().as_secs_f64();
    assert!(dt < 300.0, "runtime {dt:.1}s exceeds 5min");
    println!(
        "ACCEPTANCE 2 (degree bound): PASS - 50 systems hold (min slack {:.2e}), registered defect {:.4}, {:.1}s",
        worst, defect, dt
    );
}

#[test]
fn criterion_3_rigidity_round_trip() {
    let t0 = Instant::now();
    let h0 = planted_h0();
    let (sys, fit_residuals) = conjugated_system(&affine_pair(), &h0, 16, 1024, 1e-8).unwrap();
    for r in &fit_residuals {
        assert!(*r < 1e-8);
    }
    let report = rigidity_pipeline(&sys, 4096, 7, 5e-3).unwrap();
    assert!(report.rigid, "round-trip system must be detected rigid");
    for d in &report.per_map_invariance_defect {
        assert!(*d < 1e-3, "invariance defect {d}");
    }
    let residuals = report.affine_residuals.as_ref().unwrap();
    let planted = [0.3, 0.7];
    for (i, (rho, sup)) in residuals.iter().enumerate() {
        assert!(circ_dist(*rho, planted[i]) < 1e-2, "map {i}: rho {rho}");
        assert!(*sup <= 1e-2, "map {i}: residual {sup}");
    }
    // recovered h matches h0 up to rotation
    let h = report.conjugacy.as_ref().unwrap();
    let n = 512;
    let devs: Vec<f64> = (0..n)
        .map(|t| frac(h.eval(t as f64 / n as f64) - h0.eval(t as f64 / n as f64)))
        .collect();
    let rot = rigidity_core::circular_mean(&devs);
    let sup = devs.iter().map(|&d| circ_dist(d, rot)).fold(0.0f64, f64::max);
    assert!(sup <= 1e-2, "h deviates from planted h0 by {sup}");
    let dt = t0.elapsed().as_secs_f64();
    assert!(dt < 60.0, "runtime {dt:.1}s exceeds 1min");
    println!(
        "ACCEPTANCE 3 (rigidity round-trip): PASS - defect {:.2e}, max residual {:.2e}, h dev {:.2e}, {:.1}s",
        report.defect,
        residuals.iter().map(|r| r.1).fold(0.0f64, f64::max),
        sup,
        dt
    );
}

#[test]
fn criterion_4_matrix_anchors() {
    let t0 = Instant::now();
    let cat_fam = MatrixFamily::single(cat_matrix()).unwrap();
    let top: Estimate64 = top_lyapunov(&cat_fam, 11, 1_000_000, 8).unwrap();
    assert!(top.stderr < 5e-4, "stderr {}", top.stderr);
    assert!((top.value - CAT_TOP).abs() <= 3.0 * top.stderr + 1e-9, "cat top {}", top.value);

    let spec = lyapunov_spectrum_qr::<f64>(&cat_fam, 12, 200_000, 8).unwrap();
    assert!(
        spec.sum().abs() <= 3.0 * spec.sum_stderr() + 1e-9,
        "QR pair sum {}",
        spec.sum()
    );

    let commuting =
        MatrixFamily::new(vec![cat_matrix(), cat_matrix().pow(2).unwrap()], vec![0.5, 0.5])
            .unwrap();
    let mix: Estimate64 = top_lyapunov(&commuting, 13, 1_000_000, 8).unwrap();
    let expected = 1.5 * CAT_TOP; // 1.443636
    assert!((mix.value - expected).abs() <= 3.0 * mix.stderr, "commuting top {}", mix.value);
    let dt = t0.elapsed().as_secs_f64();
    assert!(dt < 30.0, "runtime {dt:.1}s exceeds 30s");
    println!(
        "ACCEPTANCE 4 (matrix anchors): PASS - cat err {:.2e}, sum {:.2e}, commuting err {:.2e}, {:.1}s",
        (top.value - CAT_TOP).abs(),
        spec.sum().abs(),
        (mix.value - expected).abs(),
        dt
    );
}

/// Independent oracle for the generic test on 2x2 matrices: closed-form
/// eigenvalues plus divisor-based factor enumeration (monic quadratics with
/// unit constant term factor only through roots +-1).
fn oracle_generic_2x2(e: [i64; 4]) -> (bool, bool, bool, bool, bool) {
    let (a, b, c, d) = (e[0], e[1], e[2], e[3]);
    let tr = a + d;
    let det = a * d - b * c;
    debug_assert!(det.abs() == 1);
    let disc = tr * tr - 4 * det;
    let moduli: [f64; 2] = if disc >= 0 {
        let s = (disc as f64).sqrt();
        [((tr as f64 + s) / 2.0).abs(), ((tr as f64 - s) / 2.0).abs()]
    } else {
        let m = (det as f64).sqrt(); // complex pair, |lambda|^2 = det
        [m, m]
    };
    let hyperbolic = moduli.iter().all(|&m| (m - 1.0).abs() > 1e-9);
    // monic integer quadratic with constant +-1: reducible iff +-1 is a root
    let reducible = |t: i64, dd: i64| -> bool { 1 - t + dd == 0 || 1 + t + dd == 0 };
    let irr = !reducible(tr, det);
    // A^4 in exact integers
    let mul = |x: [i64; 4], y: [i64; 4]| -> [i64; 4] {
        [
            x[0] * y[0] + x[1] * y[2],
            x[0] * y[1] + x[1] * y[3],
            x[2] * y[0] + x[3] * y[2],
            x[2] * y[1] + x[3] * y[3],
        ]
    };
    let a2 = mul(e, e);
    let a4 = mul(a2, a2);
    let tr4 = a4[0] + a4[3];
    let det4 = 1i64; // det^4
    let irr4 = !reducible(tr4, det4);
    let modulus_rule = if (moduli[0] - moduli[1]).abs() <= 1e-9 * (1.0 + moduli[0]) {
        disc < 0 // an equal-modulus pair must be complex conjugate
    } else {
        true
    };
    (hyperbolic && irr && irr4 && modulus_rule, hyperbolic, irr, irr4, modulus_rule)
}

#[test]
fn criterion_5_exact_certificates() {
    let t0 = Instant::now();
    // exhaustive sweep over GL(2,Z) with entries in [-5, 5]
    let mut checked = 0usize;
    for a in -5i64..=5 {
        for b in -5i64..=5 {
            for c in -5i64..=5 {
                for d in -5i64..=5 {
                    if (a * d - b * c).abs() != 1 {
                        continue;
                    }
                    let m = IntMatrix::from_2x2(a, b, c, d);
                    let got = is_generic_automorphism(&m).unwrap();
                    let (generic, hyp, irr, irr4, modr) = oracle_generic_2x2([a, b, c, d]);
                    assert_eq!(got.generic, generic, "disagreement at {:?}", [a, b, c, d]);
                    assert_eq!(got.hyperbolic, hyp, "hyperbolicity at {:?}", [a, b, c, d]);
                    assert_eq!(got.char_irreducible, irr, "irreducibility at {:?}", [a, b, c, d]);
                    assert_eq!(got.char_pow4_irreducible, irr4, "A^4 at {:?}", [a, b, c, d]);
                    assert_eq!(got.modulus_rule, modr, "modulus rule at {:?}", [a, b, c, d]);
                    assert!(got.exact);
                    checked += 1;
                }
            }
        }
    }
    // 616 unimodular matrices live in the [-5,5] entry box (independently
    // recounted before freezing)
    assert_eq!(checked, 616, "sweep size changed: {checked}");

    // cone certificate equals the closed form: family minimum is sqrt(2),
    // attained by the cat map on both sides and by [[3,2],[1,1]] on the
    // stable side (exact integer Gram entries: min(G11, G22) when G12 > 0).
    let fam = MatrixFamily::new(
        vec![cat_matrix(), IntMatrix::from_2x2(3, 2, 1, 1)],
        vec![0.5, 0.5],
    )
    .unwrap();
    let cert = certify_cone_hyperbolic::<f64>(&fam, &ConePair::Quadrant).unwrap();
    assert!(cert.ok);
    let mut closed_form = f64::INFINITY;
    for m in fam.matrices() {
        let gram_min = |mm: &IntMatrix| -> i64 {
            let (a, b, c, d) = (mm.get(0, 0), mm.get(0, 1), mm.get(1, 0), mm.get(1, 1));
            let (g11, g22, g12) = (a * a + c * c, b * b + d * d, a * b + c * d);
            assert!(g12 > 0, "interior minimum would need a different candidate");
            g11.min(g22)
        };
        let minv = m.inverse_2x2().unwrap();
        // stable cone Q2 = R * Q1 with R = diag(-1, 1): flip a column sign
        let flipped = IntMatrix::from_2x2(-minv.get(0, 0), minv.get(0, 1), -minv.get(1, 0), minv.get(1, 1));
        closed_form = closed_form
            .min((gram_min(m) as f64).sqrt())
            .min((gram_min(&flipped) as f64).sqrt());
    }
    assert!((cert.gamma - closed_form.ln()).abs() < 1e-12, "gamma {} vs closed form {}", cert.gamma, closed_form.ln());
    assert!((cert.gamma - 0.5 * LN2).abs() < 1e-12);
    let dt = t0.elapsed().as_secs_f64();
    assert!(dt < 60.0, "runtime {dt:.1}s exceeds 1min");
    println!(
        "ACCEPTANCE 5 (exact certificates): PASS - {} matrices swept with zero disagreements, gamma err {:.1e}, {:.1}s",
        checked,
        (cert.gamma - 0.5 * LN2).abs(),
        dt
    );
}

#[test]
fn criterion_6_torus_inequality() {
    let t0 = Instant::now();
    let cat_sys = RandomToralSystem::single(perturbed_cat(0.0), ConePair::Quadrant).unwrap();
    let s = srb_exponents(&cat_sys, 5, 8, 50_000, 1_000).unwrap();
    assert!((s.exponents[0] - CAT_TOP).abs() <= 3.0 * s.stderrs[0] + 1e-9, "{}", s.exponents[0]);
    assert!((s.exponents[1] + CAT_TOP).abs() <= 3.0 * s.stderrs[1] + 1e-9, "{}", s.exponents[1]);

    // pre-registered eps = 0.05 perturbation; gap frozen from the pilot run
    // at 1.75e-3, asserted above both 5 stderr and half its pilot value.
    let sys = RandomToralSystem::single(perturbed_cat(0.05), cat_cones()).unwrap();
    let p = srb_exponents(&sys, 5, 16, 125_000, 1_000).unwrap();
    let gap = CAT_TOP - p.exponents[0];
    assert!(gap > 5.0 * p.stderrs[0], "gap {gap} vs stderr {}", p.stderrs[0]);
    assert!(gap > 8e-4, "gap {gap} below frozen pilot bound");
    let dt = t0.elapsed().as_secs_f64();
    assert!(dt < 120.0, "runtime {dt:.1}s exceeds 2min");
    println!(
        "ACCEPTANCE 6 (torus inequality): PASS - cat err {:.1e}, eps=0.05 gap {:.3e} ({:.0} stderr), {:.1}s",
        (s.exponents[0] - CAT_TOP).abs(),
        gap,
        gap / p.stderrs[0],
        dt
    );
}

#[test]
fn criterion_7_conjugacy_solver_round_trip() {
    let t0 = Instant::now();
    // affine case against the closed form (A - I)^{-1} v
    let affine = rigidity_core::PerturbedToralMap::new(
        cat_matrix(),
        [0.3, 0.7],
        0.0,
        [Default::default(), Default::default()],
    )
    .unwrap();
    let h = solve_linear_conjugacy(&affine, 64, 1e-11, 2_000).unwrap();
    let expect = [0.7, -0.4]; // (A-I)^{-1} (0.3, 0.7) for the cat map
    let affine_err = h
        .displacements()
        .iter()
        .map(|d| (d[0] - expect[0]).hypot(d[1] - expect[1]))
        .fold(0.0f64, f64::max);
    assert!(affine_err < 1e-10, "affine error {affine_err}");

    // planted phi with amplitude 0.002; solver tolerance sits above the
    // bilinear discretization floor (~2e-7 on a 256^2 grid)
    let phi = planted_phi(0.002);
    let (map, fit_res) =
        rigidity_core::torus::conjugated_toral_map(cat_matrix(), [0.0, 0.0], &phi, 8, 64, 1e-8)
            .unwrap();
    assert!(fit_res < 1e-10);
    let h = solve_linear_conjugacy(&map, 256, 5e-7, 400).unwrap();
    let n = h.n();
    let mut sup = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let x = [i as f64 / n as f64, j as f64 / n as f64];
            let planted = [phi.psi()[0].eval(x), phi.psi()[1].eval(x)];
            let got = h.node(i, j);
            sup = sup.max((got[0] - planted[0]).hypot(got[1] - planted[1]));
        }
    }
    assert!(sup < 1e-4, "recovery error {sup}");
    let res4 = conjugacy_residual(&map, &h, 4);
    assert!(res4 < 1e-6, "verification residual {res4}");
    let dt = t0.elapsed().as_secs_f64();
    assert!(dt < 120.0, "runtime {dt:.1}s exceeds 2min");
    println!(
        "ACCEPTANCE 7 (conjugacy solver): PASS - affine err {:.1e}, recovery {:.2e}, residual(4x) {:.2e}, {:.1}s",
        affine_err, sup, res4, dt
    );
}

#[test]
fn criterion_8_nonrandomness_statistic() {
    let t0 = Instant::now();
    let single = RandomToralSystem::single(perturbed_cat(0.05), cat_cones()).unwrap();
    let d1 = stable_bundle_dispersion(&single, 3, 8, 4, 40).unwrap();
    assert!(d1.max_angle < 1e-6, "single-map dispersion {}", d1.max_angle);

    let (rigid, _) = rigid_torus_family(0.005);
    let d2 = stable_bundle_dispersion(&rigid, 3, 8, 4, 40).unwrap();
    assert!(d2.max_angle < 1e-6, "rigid-family dispersion {}", d2.max_angle);

    let two = RandomToralSystem::new(
        vec![perturbed_cat(0.05), other_perturbed_cat(0.05)],
        vec![0.5, 0.5],
        cat_cones(),
    )
    .unwrap();
    let d3 = stable_bundle_dispersion(&two, 3, 8, 4, 40).unwrap();
    // frozen pilot value 7.2e-2; the criterion bound is 1e-3
    assert!(d3.max_angle > 1e-3, "two-perturbation dispersion {}", d3.max_angle);
    let dt = t0.elapsed().as_secs_f64();
    assert!(dt < 120.0, "runtime {dt:.1}s exceeds 2min");
    println!(
        "ACCEPTANCE 8 (non-randomness statistic): PASS - single {:.1e}, rigid {:.2e}, independent {:.2e}, {:.1}s",
        d1.max_angle, d2.max_angle, d3.max_angle, dt
    );
}

#[test]
fn criterion_9_property_suites() {
    let t0 = Instant::now();
    // equivariance of Oseledets directions under the derivative cocycle
    let two = RandomToralSystem::new(
        vec![perturbed_cat(0.03), other_perturbed_cat(0.03)],
        vec![0.5, 0.5],
        cat_cones(),
    )
    .unwrap();
    let x = [0.21, 0.83];
    let past: Vec<usize> = (0..41).map(|i| (i * 5 + 1) % 2).collect();
    let here = unstable_direction(&two, &past[..40], x, 40).unwrap();
    let next_map = 1usize;
    let fx = two.maps()[next_map].eval(x);
    let mut shifted = vec![next_map];
    shifted.extend_from_slice(&past[..40]);
    let there = unstable_direction(&two, &shifted, fx, 40).unwrap();
    let j = two.maps()[next_map].jacobian(x);
    let pushed = [
        j[0][0] * here[0] + j[0][1] * here[1],
        j[1][0] * here[0] + j[1][1] * here[1],
    ];
    let norm = pushed[0].hypot(pushed[1]);
    let pushed = [pushed[0] / norm, pushed[1] / norm];
    let cross = (pushed[0] * there[1] - pushed[1] * there[0]).abs();
    let dot = (pushed[0] * there[0] + pushed[1] * there[1]).abs();
    let angle = cross.atan2(dot);
    assert!(angle < 1e-8, "equivariance angle {angle}");

    // conjugation invariance of the circle exponent
    let h0 = planted_h0();
    let (conj, _) = conjugated_system(&affine_pair(), &h0, 16, 1024, 1e-8).unwrap();
    let a: ExponentEstimate<f64> = lyapunov_birkhoff(&affine_pair(), 51, 16, 62_500, 1_000).unwrap();
    let b: ExponentEstimate<f64> = lyapunov_birkhoff(&conj, 52, 16, 62_500, 1_000).unwrap();
    let joint = (a.stderr.powi(2) + b.stderr.powi(2)).sqrt();
    assert!(
        (a.value - b.value).abs() <= 3.0 * joint + 1e-4,
        "conjugation shifts exponent: {} vs {}",
        a.value,
        b.value
    );

    // determinism: bit-identical reruns of every stochastic estimator
    let sys = registered_circle_system();
    let e1 = lyapunov_birkhoff(&sys, 9, 8, 5_000, 500).unwrap();
    let e2 = lyapunov_birkhoff(&sys, 9, 8, 5_000, 500).unwrap();
    assert_eq!(e1.value.to_bits(), e2.value.to_bits());
    let f1: Estimate64 = top_lyapunov(&MatrixFamily::single(cat_matrix()).unwrap(), 3, 10_000, 4).unwrap();
    let f2: Estimate64 = top_lyapunov(&MatrixFamily::single(cat_matrix()).unwrap(), 3, 10_000, 4).unwrap();
    assert_eq!(f1.value.to_bits(), f2.value.to_bits());
    let cat_sys = RandomToralSystem::single(perturbed_cat(0.02), cat_cones()).unwrap();
    let g1 = srb_exponents(&cat_sys, 4, 4, 10_000, 500).unwrap();
    let g2 = srb_exponents(&cat_sys, 4, 4, 10_000, 500).unwrap();
    assert_eq!(g1.exponents[0].to_bits(), g2.exponents[0].to_bits());
    // (byte-identical CLI reports are covered by the rigidity-lab suite)

    // derivative versus central finite differences
    let map = ExpandingCircleMap::new(
        2,
        0.37,
        vec![rigidity_core::circle::TrigTerm(1, 0.02, -0.01), rigidity_core::circle::TrigTerm(3, 0.005, 0.003)],
    )
    .unwrap();
    let hstep = 1e-5;
    let mut max_rel = 0.0f64;
    for t in 0..200 {
        let x = t as f64 / 200.0;
        let fd = (map.eval_lift(x + hstep) - map.eval_lift(x - hstep)) / (2.0 * hstep);
        let exact = map.derivative(x);
        max_rel = max_rel.max((fd - exact).abs() / exact.abs());
    }
    assert!(max_rel < 1e-6, "finite-difference relative error {max_rel}");

    // translation verification across a rigid torus family recovers the
    // planted translation
    let (rigid, _) = rigid_torus_family(0.005);
    let h1 = solve_linear_conjugacy(&rigid.maps()[0], 128, 5e-6, 400).unwrap();
    let k2 = conjugate_map_grid(&h1, &rigid.maps()[1], 128).unwrap();
    let check = verify_translation(Some(&k2), &ConjugacyGrid::identity(128), 1e-3);
    assert!(check.is_translation, "residual {}", check.residual);
    assert!(circ_dist(check.v[0], 0.3) < 1e-3 && circ_dist(check.v[1], 0.7) < 1e-3);

    let dt = t0.elapsed().as_secs_f64();
    println!(
        "ACCEPTANCE 9 (property suites): PASS - equivariance {:.1e}, conj-invariance gap {:.1e}, determinism bitwise, FD rel {:.1e}, translation ({:.4}, {:.4}), {:.1}s",
        angle,
        (a.value - b.value).abs(),
        max_rel,
        check.v[0],
        check.v[1],
        dt
    );
}

//! Calibration runs behind the frozen test constants.
//!
//! Prints the oracle values (density ratios, exponent defects, dispersion
//! statistics, conjugacy residuals) for the pre-registered test systems so
//! thresholds in the test suites can be pinned to measured numbers rather
//! than guesses. Run with `cargo run --release -p rigidity-core --example
//! calibrate`.

use rigidity_core::circle::{ExpandingCircleMap, RandomCircleSystem, TrigTerm};
use rigidity_core::cocycle::{ConePair, IntMatrix};
use rigidity_core::rigidity::{
    build_conjugacy, conjugated_system, degree_bound, q_functional_average, rigidity_pipeline,
    TrigDiffeo,
};
use rigidity_core::torus::{
    conjugacy_residual, conjugated_toral_map, solve_linear_conjugacy, srb_exponents,
    stable_bundle_dispersion, verify_translation, PerturbedToralMap, RandomToralSystem, Term2,
    TrigDiffeo2, TrigPoly2,
};
use rigidity_core::transfer::{
    build_annealed_ulam, lyapunov_birkhoff, lyapunov_quadrature, stationary_density,
};
use std::f64::consts::TAU;

fn registered_circle() -> RandomCircleSystem<f64> {
    let m = ExpandingCircleMap::new(3, 0.0, vec![TrigTerm(1, 0.3, 0.0)]).unwrap();
    RandomCircleSystem::single(m).unwrap()
}

fn main() {
    circle_section();
    roundtrip_section();
    torus_exponent_section();
    dispersion_section();
    conjugacy_solver_section();
}

fn circle_section() {
    println!("== registered circle map: degree 3, P = 0.3 sin(2 pi x) ==");
    let sys = registered_circle();
    println!("certified margin (grid 4096): {:.6}", sys.min_margin());

    let mut prev = None;
    for bins in [1024usize, 2048, 4096, 8192] {
        let op = build_annealed_ulam(&sys, bins, 24).unwrap();
        let q = stationary_density(&op, 1e-11, 50_000).unwrap();
        let est = lyapunov_quadrature(&sys, &q);
        let ratio = q.max_mass() / q.min_mass();
        let change = prev.map(|p: f64| (est.value - p).abs());
        println!(
            "n_bins {bins:5}: lambda_quad {:.9}, max/min ratio {:.4}, change {:?}",
            est.value, ratio, change
        );
        prev = Some(est.value);
    }

    let op = build_annealed_ulam(&sys, 8192, 24).unwrap();
    let q = stationary_density(&op, 1e-11, 50_000).unwrap();
    let quad = lyapunov_quadrature(&sys, &q);
    let bk = lyapunov_birkhoff(&sys, 2024, 16, 62_500, 1_000).unwrap();
    let bound = degree_bound(&sys);
    println!(
        "birkhoff(1e6 total) {:.9} +- {:.2e}; quad {:.9}; |diff| {:.3e}",
        bk.value,
        bk.stderr,
        quad.value,
        (bk.value - quad.value).abs()
    );
    println!(
        "degree bound {:.9}; defect_quad {:.6}; defect_birkhoff {:.6}",
        bound,
        bound - quad.value,
        bound - bk.value
    );
    let avg = q_functional_average(&sys, &q, 11, 200_000).unwrap();
    println!("Q-functional average (2e5 steps, 8192 bins): {:.6}", avg);
}

fn roundtrip_section() {
    println!("\n== circle rigidity round-trip ==");
    let affine = RandomCircleSystem::new(
        vec![
            ExpandingCircleMap::affine(2, 0.3).unwrap(),
            ExpandingCircleMap::affine(3, 0.7).unwrap(),
        ],
        vec![0.5, 0.5],
    )
    .unwrap();
    let h0 = TrigDiffeo::new(vec![TrigTerm(1, 0.05 / TAU, 0.0)]).unwrap();
    let (sys, residuals) = conjugated_system(&affine, &h0, 16, 1024, 1e-8).unwrap();
    let fmt = |v: &[f64]| v.iter().map(|x| format!("{x:.3e}")).collect::<Vec<_>>().join(", ");
    println!("fit residuals: [{}]", fmt(&residuals));
    let report = rigidity_pipeline(&sys, 4096, 7, 5e-3).unwrap();
    println!(
        "defect {:.3e}, rigid {}, invariance defects [{}]",
        report.defect,
        report.rigid,
        fmt(&report.per_map_invariance_defect)
    );
    if let Some(rs) = &report.affine_residuals {
        for (i, (rho, sup)) in rs.iter().enumerate() {
            println!("map {i}: rho {rho:.6}, residual {sup:.3e}");
        }
    }
    let h = report.conjugacy.as_ref().unwrap();
    // compare h with h0 up to rotation
    let n = 512;
    let devs: Vec<f64> = (0..n)
        .map(|t| rigidity_core::frac(h.eval(t as f64 / n as f64) - h0.eval(t as f64 / n as f64)))
        .collect();
    let c = rigidity_core::circular_mean(&devs);
    let sup = devs
        .iter()
        .map(|&d| rigidity_core::circ_dist(d, c))
        .fold(0.0f64, f64::max);
    println!("h vs planted h0: rotation {c:.3e}, sup deviation {sup:.3e}");

    // conjugation invariance of the exponent
    let est = lyapunov_birkhoff(&sys, 99, 16, 62_500, 1_000).unwrap();
    println!(
        "exponent of conjugated family {:.9} +- {:.2e} (affine value {:.9})",
        est.value,
        est.stderr,
        0.5 * (2.0f64.ln() + 3.0f64.ln())
    );

    // direct-density comparison: build h from the Ulam density directly
    let op = build_annealed_ulam(&sys, 4096, 24).unwrap();
    let q = stationary_density(&op, 1e-10, 50_000).unwrap();
    let _ = build_conjugacy(&q).unwrap();

    // Ulam refinement behavior on this smooth system (Cauchy factors)
    let mut prev: Option<f64> = None;
    let mut last_change: Option<f64> = None;
    for bins in [512usize, 1024, 2048, 4096] {
        let op = build_annealed_ulam(&sys, bins, 24).unwrap();
        let q = stationary_density(&op, 1e-11, 50_000).unwrap();
        let est = lyapunov_quadrature(&sys, &q);
        if let Some(p) = prev {
            let change = (est.value - p).abs();
            let factor = last_change.map(|lc| change / lc);
            println!("n_bins {bins:4}: lambda {:.10}, change {:.3e}, factor {:?}", est.value, change, factor);
            last_change = Some(change);
        } else {
            println!("n_bins {bins:4}: lambda {:.10}", est.value);
        }
        prev = Some(est.value);
    }
}

fn perturbed_cat(eps: f64) -> PerturbedToralMap<f64> {
    PerturbedToralMap::linear_cat(
        eps,
        [
            TrigPoly2::new(vec![Term2(0, 1, 1.0, 0.0)]),
            TrigPoly2::new(vec![Term2(1, 0, 0.0, 1.0)]),
        ],
    )
    .unwrap()
}

/// Cones adapted to the cat map's eigendirections: at eps = 0.05 the
/// quadrant pair is too wide for pointwise expansion (det Df dips well below
/// one), while a radius-0.3 cone around each eigenaxis certifies cleanly.
fn cat_cones() -> ConePair<f64> {
    ConePair::Axial {
        unstable_axis: [1.0, 0.6180339887498949],
        stable_axis: [1.0, -1.618033988749895],
        kappa: 0.3,
    }
}

fn torus_exponent_section() {
    println!("\n== torus exponents ==");
    let cat_top = 0.9624236501192069f64;
    let sys = RandomToralSystem::single(perturbed_cat(0.0), ConePair::Quadrant).unwrap();
    let s = srb_exponents(&sys, 5, 8, 100_000, 1_000).unwrap();
    println!(
        "unperturbed cat: ({:.9} +- {:.1e}, {:.9} +- {:.1e})",
        s.exponents[0], s.stderrs[0], s.exponents[1], s.stderrs[1]
    );
    let sys = RandomToralSystem::single(perturbed_cat(0.05), cat_cones()).unwrap();
    println!("eps=0.05 cone gamma: {:.4}", sys.gamma());
    let s = srb_exponents(&sys, 5, 16, 125_000, 1_000).unwrap();
    println!(
        "eps=0.05: top {:.9} +- {:.2e}; gap {:.3e} = {:.1} stderr",
        s.exponents[0],
        s.stderrs[0],
        cat_top - s.exponents[0],
        (cat_top - s.exponents[0]) / s.stderrs[0]
    );
    println!(
        "          bottom {:.9} +- {:.2e}; |bottom| gap {:.3e}",
        s.exponents[1],
        s.stderrs[1],
        cat_top - s.exponents[1].abs()
    );
}

fn dispersion_section() {
    println!("\n== stable bundle dispersion ==");
    let single = RandomToralSystem::single(perturbed_cat(0.05), cat_cones()).unwrap();
    let d = stable_bundle_dispersion(&single, 3, 8, 4, 40).unwrap();
    println!("single map: max {:.3e}, mean {:.3e}", d.max_angle, d.mean_angle);

    // two independently perturbed cat maps
    let other = PerturbedToralMap::linear_cat(
        0.05,
        [
            TrigPoly2::new(vec![Term2(1, 0, 0.0, 1.0)]),
            TrigPoly2::new(vec![Term2(0, 1, 1.0, 0.0)]),
        ],
    )
    .unwrap();
    let two = RandomToralSystem::new(
        vec![perturbed_cat(0.05), other],
        vec![0.5, 0.5],
        cat_cones(),
    )
    .unwrap();
    let d = stable_bundle_dispersion(&two, 3, 8, 4, 40).unwrap();
    println!("two independent perturbations: max {:.3e}, mean {:.3e}", d.max_angle, d.mean_angle);

    // rigid conjugated family: all maps phi^{-1}(A + v_i)phi
    let phi = TrigDiffeo2::new([
        TrigPoly2::new(vec![Term2(0, 1, 0.005, 0.0)]),
        TrigPoly2::new(vec![Term2(1, 0, 0.005, 0.0)]),
    ])
    .unwrap();
    let a = IntMatrix::from_2x2(2, 1, 1, 1);
    let (f1, r1) = conjugated_toral_map(a.clone(), [0.0, 0.0], &phi, 8, 64, 1e-8).unwrap();
    let (f2, r2) = conjugated_toral_map(a, [0.3, 0.7], &phi, 8, 64, 1e-8).unwrap();
    println!("conjugated family fit residuals: {r1:.3e}, {r2:.3e}");
    let rigid = RandomToralSystem::new(vec![f1, f2], vec![0.5, 0.5], ConePair::Quadrant).unwrap();
    let d = stable_bundle_dispersion(&rigid, 3, 8, 4, 40).unwrap();
    println!("rigid conjugated family: max {:.3e}, mean {:.3e}", d.max_angle, d.mean_angle);

    let s = srb_exponents(&rigid, 17, 8, 50_000, 1_000).unwrap();
    println!(
        "rigid family exponents: ({:.9} +- {:.1e}, {:.9} +- {:.1e})",
        s.exponents[0], s.stderrs[0], s.exponents[1], s.stderrs[1]
    );
}

fn conjugacy_solver_section() {
    println!("\n== conjugacy solver ==");
    // affine closed form
    let affine = PerturbedToralMap::new(
        IntMatrix::from_2x2(2, 1, 1, 1),
        [0.3, 0.7],
        0.0,
        [TrigPoly2::default(), TrigPoly2::default()],
    )
    .unwrap();
    let h = solve_linear_conjugacy(&affine, 64, 1e-12, 2000).unwrap();
    let expect = [0.7f64, -0.4];
    let err = h
        .displacements()
        .iter()
        .map(|d| (d[0] - expect[0]).hypot(d[1] - expect[1]))
        .fold(0.0f64, f64::max);
    println!("affine case vs (A-I)^{{-1}} v: sup err {err:.3e}");

    // planted trig conjugacy, criterion-7 sizes
    let phi = TrigDiffeo2::new([
        TrigPoly2::new(vec![Term2(0, 1, 0.002, 0.0)]),
        TrigPoly2::new(vec![Term2(1, 0, 0.002, 0.0)]),
    ])
    .unwrap();
    let a = IntMatrix::from_2x2(2, 1, 1, 1);
    let (f, fit_res) = conjugated_toral_map(a, [0.0, 0.0], &phi, 8, 64, 1e-8).unwrap();
    println!("fit residual {fit_res:.3e}");
    // tol sits above the bilinear discretization floor (~2e-7 at 256^2)
    let h = solve_linear_conjugacy(&f, 256, 5e-7, 400).unwrap();
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
    println!("recovered u vs planted psi: sup err {sup:.3e}");
    let res4 = conjugacy_residual(&f, &h, 4);
    println!("functional-equation residual on 4x grid: {res4:.3e}");

    // translation recovery across a rigid family
    let phi_big = TrigDiffeo2::new([
        TrigPoly2::new(vec![Term2(0, 1, 0.005, 0.0)]),
        TrigPoly2::new(vec![Term2(1, 0, 0.005, 0.0)]),
    ])
    .unwrap();
    let a = IntMatrix::from_2x2(2, 1, 1, 1);
    let (f1, _) = conjugated_toral_map(a.clone(), [0.0, 0.0], &phi_big, 8, 64, 1e-8).unwrap();
    let (f2, _) = conjugated_toral_map(a, [0.3, 0.7], &phi_big, 8, 64, 1e-8).unwrap();
    let h1 = solve_linear_conjugacy(&f1, 128, 5e-6, 400).unwrap();
    let k2 = rigidity_core::torus::conjugate_map_grid(&h1, &f2, 128).unwrap();
    let check = verify_translation(Some(&k2), &rigidity_core::torus::ConjugacyGrid::identity(128), 1e-3);
    println!(
        "h1 f2 h1^-1 vs A + v: is_translation {}, v ({:.6}, {:.6}), residual {:.3e}",
        check.is_translation, check.v[0], check.v[1], check.residual
    );
}

//! Degree-bound certification and the equality (rigidity) case on the circle.
//!
//! The exponent of the stationary SRB measure is bounded by the mean log
//! degree; equality forces the stationary density to be invariant under every
//! generator and `h(x) = integral_0^x q` to conjugate the whole family to
//! affine maps `x -> deg * x + rho`. The pipeline here measures the defect,
//! and in the near-equality case builds `h` and verifies affinity map by map.

use serde::{Deserialize, Serialize};

use crate::circle::{ExpandingCircleMap, RandomCircleSystem, TrigTerm};
use crate::error::{Error, Result};
use crate::rng::{self, StreamPurpose};
use crate::scalar::Real;
use crate::transfer::{
    build_annealed_ulam, build_map_ulam, lyapunov_birkhoff, lyapunov_quadrature,
    stationary_density, ExponentEstimate, UlamDensity,
};
use crate::util::{circ_dist, circular_mean, frac, kahan_sum, Kahan};

/// Exact mean log degree `sum_i p_i log |d_i|`, the right side of the
/// exponent inequality.
pub fn degree_bound<R: Real>(system: &RandomCircleSystem<R>) -> R {
    kahan_sum(
        system
            .maps()
            .iter()
            .zip(system.probs())
            .map(|(m, &p)| p * R::of(m.degree().unsigned_abs() as f64).ln()),
    )
}

/// Orientation-preserving circle homeomorphism sampled on a uniform grid,
/// evaluated by monotone cubic interpolation, inverted by bisection.
///
/// Built conjugacies satisfy `h(0) = 0`, `h(1) = 1`; `rotated` produces the
/// composition with a rigid rotation, which shifts the grid values.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CircleConjugacy<R> {
    values: Vec<R>,
    slopes: Vec<R>,
}

impl<R: Real> CircleConjugacy<R> {
    /// Build from grid values `h(j/N)`, `j = 0..=N`, with `h(1) = h(0) + 1`.
    pub fn from_values(values: Vec<R>) -> Result<Self> {
        let n = values.len().checked_sub(1).unwrap_or(0);
        if n < 2 {
            return Err(Error::InvalidParameter("conjugacy grid needs >= 3 nodes".into()));
        }
        if (values[n] - values[0] - R::one()).abs() > R::of(1e-9) {
            return Err(Error::InvalidParameter("conjugacy must satisfy h(1) = h(0) + 1".into()));
        }
        for w in values.windows(2) {
            if !(w[1] > w[0]) {
                return Err(Error::InvalidParameter("conjugacy grid must strictly increase".into()));
            }
        }
        // Fritsch-Carlson limited slopes, periodic in the displacement.
        let nr = R::of_usize(n);
        let delta: Vec<R> = (0..n).map(|j| (values[j + 1] - values[j]) * nr).collect();
        let mut slopes = Vec::with_capacity(n + 1);
        for j in 0..=n {
            let dl = delta[(j + n - 1) % n];
            let dr = delta[j % n];
            let m = ((dl + dr) / R::of(2.0)).min(R::of(3.0) * dl.min(dr));
            slopes.push(m);
        }
        Ok(CircleConjugacy { values, slopes })
    }

    pub fn n_cells(&self) -> usize {
        self.values.len() - 1
    }

    pub fn grid_values(&self) -> &[R] {
        &self.values
    }

    /// Lift value; `h(x + 1) = h(x) + 1`.
    pub fn eval(&self, x: R) -> R {
        let xf = frac(x);
        let shift = x - xf;
        let n = self.n_cells();
        let pos = xf * R::of_usize(n);
        let j = (pos.floor().as_f64() as usize).min(n - 1);
        let t = pos - R::of_usize(j);
        let h = R::one() / R::of_usize(n);
        let (y0, y1) = (self.values[j], self.values[j + 1]);
        let (m0, m1) = (self.slopes[j] * h, self.slopes[j + 1] * h);
        let t2 = t * t;
        let t3 = t2 * t;
        let two = R::of(2.0);
        let three = R::of(3.0);
        let v = (two * t3 - three * t2 + R::one()) * y0
            + (t3 - two * t2 + t) * m0
            + (three * t2 - two * t3) * y1
            + (t3 - t2) * m1;
        v + shift
    }

    pub fn eval_circle(&self, x: R) -> R {
        frac(self.eval(x))
    }

    /// Inverse on the circle by bisection to 1e-12.
    pub fn inverse(&self, y: R) -> R {
        let base = self.values[0];
        let mut target = frac(y - base) + base;
        // h maps [0,1] onto [base, base+1].
        if target < self.values[0] {
            target = target + R::one();
        }
        let mut lo = R::zero();
        let mut hi = R::one();
        let tol = R::of(1e-12);
        while hi - lo > tol {
            let mid = (lo + hi) / R::of(2.0);
            if self.eval(mid) < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        frac((lo + hi) / R::of(2.0))
    }

    /// Composition with the rotation `x -> h(x) + c`.
    pub fn rotated(&self, c: R) -> Self {
        CircleConjugacy {
            values: self.values.iter().map(|&v| v + c).collect(),
            slopes: self.slopes.clone(),
        }
    }
}

/// `h(x) = integral_0^x q dLeb` from the Ulam density: cumulative bin masses,
/// strictly increasing because every bin carries positive mass.
pub fn build_conjugacy<R: Real>(q: &UlamDensity<R>) -> Result<CircleConjugacy<R>> {
    ensure_positive(q)?;
    let mut values = Vec::with_capacity(q.n_bins() + 1);
    let mut acc = Kahan::new();
    values.push(R::zero());
    for &m in q.mass() {
        acc.add(m);
        values.push(acc.value());
    }
    let total = *values.last().unwrap();
    for v in &mut values {
        *v = *v / total;
    }
    CircleConjugacy::from_values(values)
}

fn ensure_positive<R: Real>(q: &UlamDensity<R>) -> Result<()> {
    for (bin, &m) in q.mass().iter().enumerate() {
        if m < R::of(1e-12) {
            return Err(Error::DegenerateDensity { bin });
        }
    }
    Ok(())
}

/// Time average of `Q(omega, x) = q(f(x)) |f'(x)| / (q(x) |deg f|)` along a
/// seeded orbit started from a q-distributed point. Converges to 1 for the
/// true stationary density.
pub fn q_functional_average<R: Real>(
    system: &RandomCircleSystem<R>,
    q: &UlamDensity<R>,
    seed: u64,
    n_steps: usize,
) -> Result<R> {
    ensure_positive(q)?;
    if n_steps == 0 {
        return Err(Error::InvalidParameter("n_steps must be positive".into()));
    }
    let mut rng = rng::derive_stream(seed, StreamPurpose::QFunctional, 0);
    let mut x = q.sample_point(rng::uniform(&mut rng));
    let mut acc = Kahan::new();
    for _ in 0..n_steps {
        let i = rng::pick_index(&mut rng, system.probs());
        let map = &system.maps()[i];
        let fx = map.eval_circle(x);
        let deg = R::of(map.degree().unsigned_abs() as f64);
        acc.add(q.value_at(fx) * map.derivative(x).abs() / (q.value_at(x) * deg));
        x = fx;
    }
    Ok(acc.value() / R::of_usize(n_steps))
}

/// Check how close `h . f . h^{-1}` is to the affine model `deg * x + rho`.
/// Returns the recovered rotation number (circular mean) and the sup
/// circular deviation from it.
pub fn verify_affine<R: Real>(
    h: &CircleConjugacy<R>,
    map: &ExpandingCircleMap<R>,
    n_test: usize,
) -> (R, R) {
    assert!(n_test >= 8, "n_test too small");
    let d = R::of(map.degree() as f64);
    let mut devs = Vec::with_capacity(n_test);
    for t in 0..n_test {
        let x = R::of_usize(t) / R::of_usize(n_test);
        let g = h.eval_circle(map.eval_lift(h.inverse(x)));
        devs.push(frac(g - d * x));
    }
    let rho = circular_mean(&devs);
    let sup = devs
        .iter()
        .map(|&v| circ_dist(v, rho))
        .fold(R::zero(), |a, b| a.max(b));
    (rho, sup)
}

/// Everything the rigidity decision rests on, serializable for reports.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RigidityReport<R> {
    pub degree_bound: R,
    /// Deterministic quadrature exponent (primary for the defect).
    pub exponent: ExponentEstimate<R>,
    /// Independent Monte Carlo cross-check.
    pub exponent_birkhoff: ExponentEstimate<R>,
    pub defect: R,
    pub threshold: R,
    pub rigid: bool,
    /// `||L_i q - q||_1` per generator; near zero iff q is invariant under map i.
    pub per_map_invariance_defect: Vec<R>,
    pub conjugacy: Option<CircleConjugacy<R>>,
    /// `(rho_f, sup residual)` per generator, present when the defect passes.
    pub affine_residuals: Option<Vec<(R, R)>>,
}

#[derive(Clone, Copy, Debug)]
pub struct PipelineParams {
    pub subdivisions: usize,
    /// Finer sampling for the per-map invariance defects, where the 1/S
    /// quantization of boundary-bin weights dominates otherwise.
    pub invariance_subdivisions: usize,
    pub density_tol: f64,
    pub density_max_iters: usize,
    pub birkhoff_orbits: usize,
    pub birkhoff_steps: usize,
    pub birkhoff_burn_in: usize,
    pub n_test: usize,
}

impl Default for PipelineParams {
    fn default() -> Self {
        PipelineParams {
            subdivisions: 480,
            invariance_subdivisions: 480,
            density_tol: 1e-10,
            density_max_iters: 50_000,
            birkhoff_orbits: 16,
            birkhoff_steps: 200_000,
            birkhoff_burn_in: 1_000,
            n_test: 512,
        }
    }
}

/// Full rigidity decision: density, both exponent estimators, defect, and in
/// the near-equality case the conjugacy and per-map affinity residuals.
pub fn rigidity_pipeline<R: Real>(
    system: &RandomCircleSystem<R>,
    n_bins: usize,
    seed: u64,
    threshold: R,
) -> Result<RigidityReport<R>> {
    rigidity_pipeline_with(system, n_bins, seed, threshold, &PipelineParams::default())
}

pub fn rigidity_pipeline_with<R: Real>(
    system: &RandomCircleSystem<R>,
    n_bins: usize,
    seed: u64,
    threshold: R,
    params: &PipelineParams,
) -> Result<RigidityReport<R>> {
    if !(threshold > R::zero()) {
        return Err(Error::InvalidParameter("threshold must be positive".into()));
    }
    let op = build_annealed_ulam(system, n_bins, params.subdivisions)?;
    let q = stationary_density(&op, R::of(params.density_tol), params.density_max_iters)?;
    let exponent = lyapunov_quadrature(system, &q);
    let exponent_birkhoff = lyapunov_birkhoff(
        system,
        seed,
        params.birkhoff_orbits,
        params.birkhoff_steps,
        params.birkhoff_burn_in,
    )?;
    let bound = degree_bound(system);
    let defect = bound - exponent.value;

    let mut invariance = Vec::with_capacity(system.maps().len());
    for map in system.maps() {
        let single = build_map_ulam(map, n_bins, params.invariance_subdivisions)?;
        let pushed = single.apply(q.mass());
        invariance.push(kahan_sum(
            q.mass().iter().zip(&pushed).map(|(&a, &b)| (a - b).abs()),
        ));
    }

    let mut rigid = defect <= threshold;
    let (conjugacy, affine_residuals) = if rigid {
        let h = build_conjugacy(&q)?;
        let mut residuals = Vec::with_capacity(system.maps().len());
        for map in system.maps() {
            let (rho, sup) = verify_affine(&h, map, params.n_test);
            rigid = rigid && sup <= threshold;
            residuals.push((rho, sup));
        }
        (Some(h), Some(residuals))
    } else {
        (None, None)
    };

    Ok(RigidityReport {
        degree_bound: bound,
        exponent,
        exponent_birkhoff,
        defect,
        threshold,
        rigid,
        per_map_invariance_defect: invariance,
        conjugacy,
        affine_residuals,
    })
}

/// Small trigonometric circle diffeomorphism `h0(x) = x + sum a sin + b cos`,
/// used to plant conjugated test systems.
#[derive(Clone, Debug)]
pub struct TrigDiffeo<R> {
    terms: Vec<TrigTerm<R>>,
}

impl<R: Real> TrigDiffeo<R> {
    pub fn new(terms: Vec<TrigTerm<R>>) -> Result<Self> {
        let tau = R::tau();
        let mut lip = R::zero();
        for t in &terms {
            lip = lip + tau * R::of_usize(t.k() as usize) * (t.a().abs() + t.b().abs());
        }
        if !(lip < R::one()) {
            return Err(Error::InvalidParameter(
                "trig displacement must have sup |u'| < 1 to be a diffeomorphism".into(),
            ));
        }
        Ok(TrigDiffeo { terms })
    }

    pub fn eval(&self, x: R) -> R {
        let tau = R::tau();
        let xf = frac(x);
        let mut u = R::zero();
        for t in &self.terms {
            let (s, c) = (tau * R::of_usize(t.k() as usize) * xf).sin_cos();
            u = u + t.a() * s + t.b() * c;
        }
        x + u
    }

    pub fn derivative(&self, x: R) -> R {
        let tau = R::tau();
        let xf = frac(x);
        let mut d = R::one();
        for t in &self.terms {
            let k = R::of_usize(t.k() as usize);
            let (s, c) = (tau * k * xf).sin_cos();
            d = d + tau * k * (t.a() * c - t.b() * s);
        }
        d
    }

    /// Newton inverse on the lift (the map is strictly increasing).
    pub fn inverse(&self, y: R) -> R {
        let mut x = y;
        for _ in 0..60 {
            let r = self.eval(x) - y;
            if r.abs() < R::of(1e-15) {
                break;
            }
            x = x - r / self.derivative(x);
        }
        x
    }
}

/// Fit a sampled lift `G(x) = deg * x + rho + (trig)` back into
/// [`ExpandingCircleMap`] form by a discrete Fourier projection on
/// `fit_grid` points, keeping `harmonics` modes. The sup fit error on a
/// 4x finer grid must stay below `max_residual`.
fn fit_circle_map<R: Real>(
    degree: i64,
    sample: impl Fn(R) -> R,
    harmonics: usize,
    fit_grid: usize,
    max_residual: R,
) -> Result<(ExpandingCircleMap<R>, R)> {
    let m = fit_grid;
    let tau = R::tau();
    let d = R::of(degree as f64);
    let r: Vec<R> = (0..m)
        .map(|j| {
            let x = R::of_usize(j) / R::of_usize(m);
            sample(x) - d * x
        })
        .collect();
    let mean = kahan_sum(r.iter().copied()) / R::of_usize(m);
    let mut terms = Vec::with_capacity(harmonics);
    for k in 1..=harmonics {
        let mut sa = Kahan::new();
        let mut sb = Kahan::new();
        for (j, &v) in r.iter().enumerate() {
            let ang = tau * R::of_usize(k) * R::of_usize(j) / R::of_usize(m);
            let (s, c) = ang.sin_cos();
            sa.add((v - mean) * s);
            sb.add((v - mean) * c);
        }
        let two_over_m = R::of(2.0) / R::of_usize(m);
        terms.push(TrigTerm(k as u32, sa.value() * two_over_m, sb.value() * two_over_m));
    }
    let rotation = frac(mean);
    // Fold the integer part of the mean into nothing: the lift differs from
    // the fitted lift by that integer, which is invisible on the circle.
    let map = ExpandingCircleMap::new(degree, rotation, terms)?;
    let offset = mean - rotation;
    let fine = 4 * m;
    let mut worst = R::zero();
    for j in 0..fine {
        let x = R::of_usize(j) / R::of_usize(fine);
        let err = (sample(x) - offset - map.eval_lift(x)).abs();
        worst = worst.max(err);
    }
    if worst > max_residual {
        return Err(Error::FitResidual {
            residual: worst.as_f64(),
            limit: max_residual.as_f64(),
        });
    }
    Ok((map, worst))
}

/// Conjugate every map of `base` by `h0` (producing `h0^{-1} . f . h0`) and
/// refit the results as trig maps. Returns the new system and the recorded
/// fit residuals.
pub fn conjugated_system<R: Real>(
    base: &RandomCircleSystem<R>,
    h0: &TrigDiffeo<R>,
    harmonics: usize,
    fit_grid: usize,
    max_residual: R,
) -> Result<(RandomCircleSystem<R>, Vec<R>)> {
    let mut maps = Vec::with_capacity(base.maps().len());
    let mut residuals = Vec::with_capacity(base.maps().len());
    for f in base.maps() {
        let (map, res) = fit_circle_map(
            f.degree(),
            |x| {
                // Lift of h0^{-1} . f . h0: h0 commutes with integer shifts,
                // so this expression is itself a lift of the conjugated map.
                h0.inverse(f.eval_lift(h0.eval(x)))
            },
            harmonics,
            fit_grid,
            max_residual,
        )?;
        maps.push(map);
        residuals.push(res);
    }
    let sys = RandomCircleSystem::new(maps, base.probs().to_vec())?;
    Ok((sys, residuals))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::transfer::build_annealed_ulam;
    use std::f64::consts::TAU;

    fn affine_pair() -> RandomCircleSystem<f64> {
        let maps = vec![
            ExpandingCircleMap::affine(2, 0.3).unwrap(),
            ExpandingCircleMap::affine(3, 0.7).unwrap(),
        ];
        RandomCircleSystem::new(maps, vec![0.5, 0.5]).unwrap()
    }

    #[test]
    fn degree_bound_values() {
        let single = RandomCircleSystem::single(ExpandingCircleMap::affine(2, 0.0).unwrap()).unwrap();
        assert!((degree_bound(&single) - 2.0f64.ln()).abs() < 1e-15);

        assert!((degree_bound(&affine_pair()) - 0.8958797346140276).abs() < 1e-12);

        let maps = vec![
            ExpandingCircleMap::affine(-2, 0.0).unwrap(),
            ExpandingCircleMap::affine(3, 0.0).unwrap(),
        ];
        let sys = RandomCircleSystem::new(maps, vec![0.25, 0.75]).unwrap();
        let expected = 0.25 * 2.0f64.ln() + 0.75 * 3.0f64.ln();
        assert!((degree_bound(&sys) - expected).abs() < 1e-15);
    }

    #[test]
    fn identity_conjugacy_from_uniform_density() {
        let q = UlamDensity::uniform(128);
        let h = build_conjugacy(&q).unwrap();
        for j in 0..=16 {
            let x = j as f64 / 16.0;
            assert!((h.eval(x) - x).abs() < 1e-12);
        }
    }

    #[test]
    fn cumulative_masses_give_grid_values() {
        let q = UlamDensity::from_mass(vec![0.75f64, 0.25]).unwrap();
        let h = build_conjugacy(&q).unwrap();
        assert!((h.eval(0.5) - 0.75).abs() < 1e-14);
    }

    #[test]
    fn degenerate_density_is_rejected() {
        let q = UlamDensity::from_mass(vec![1.0f64, 0.0]).unwrap();
        match build_conjugacy(&q) {
            Err(Error::DegenerateDensity { bin: 1 }) => {}
            other => panic!("expected degenerate density, got {other:?}"),
        }
    }

    #[test]
    fn inverse_composes_to_identity() {
        let op = build_annealed_ulam(&crate::transfer::tests::registered_perturbed(), 256, 24).unwrap();
        let q = stationary_density(&op, 1e-10, 20_000).unwrap();
        let h = build_conjugacy(&q).unwrap();
        for j in 0..256 {
            let x = j as f64 / 256.0;
            assert!((h.eval_circle(h.inverse(x)) - x).abs() < 1e-8);
            assert!(circ_dist(h.inverse(h.eval_circle(x)), x) < 1e-8);
        }
    }

    #[test]
    fn verify_affine_on_affine_map_is_exact() {
        let q = UlamDensity::uniform(256);
        let h = build_conjugacy(&q).unwrap();
        let map = ExpandingCircleMap::affine(2, 0.3).unwrap();
        let (rho, sup) = verify_affine(&h, &map, 512);
        assert!(circ_dist(rho, 0.3) < 1e-10);
        assert!(sup < 1e-10);
    }

    #[test]
    fn verify_affine_sees_the_trig_term() {
        // With h = id the residual is exactly the sup of the perturbation,
        // 0.3/(2 pi) for a unit-frequency sine of derivative amplitude 0.3.
        let q = UlamDensity::uniform(256);
        let h = build_conjugacy(&q).unwrap();
        let map = ExpandingCircleMap::new(2, 0.0, vec![TrigTerm(1, 0.3 / TAU, 0.0)]).unwrap();
        let (_, sup) = verify_affine(&h, &map, 1024);
        assert!(sup >= 0.3 / TAU - 1e-3, "sup {sup}");
        assert!(sup <= 0.3 / TAU + 1e-3);
    }

    #[test]
    fn residual_is_rotation_invariant() {
        // rotations aligned with the test grid leave the sampled deviation
        // set invariant, so the sup residual must match to round-off
        let sys = crate::transfer::tests::registered_perturbed();
        let op = build_annealed_ulam(&sys, 128, 24).unwrap();
        let q = stationary_density(&op, 1e-10, 20_000).unwrap();
        let h = build_conjugacy(&q).unwrap();
        let map = &sys.maps()[0];
        let (_, sup) = verify_affine(&h, map, 256);
        for c in [0.25, 93.0 / 256.0, 0.5] {
            let (_, sup_rot) = verify_affine(&h.rotated(c), map, 256);
            assert!((sup - sup_rot).abs() < 1e-10, "c {c}: {sup} vs {sup_rot}");
        }
    }

    #[test]
    fn q_average_is_one_for_affine_families() {
        let sys = affine_pair();
        let q = UlamDensity::uniform(128);
        let avg = q_functional_average(&sys, &q, 5, 100_000).unwrap();
        assert!((avg - 1.0).abs() < 1e-3, "avg {avg}");
    }

    #[test]
    fn q_average_self_consistency_for_registered_map() {
        // Frozen from the calibration run: at n_bins = 8192 and 2e5 steps the
        // time average of Q sits within 1e-2 of the proof identity 1.
        let sys = crate::transfer::tests::registered_perturbed();
        let op = build_annealed_ulam(&sys, 8192, 24).unwrap();
        let q = stationary_density(&op, 1e-10, 20_000).unwrap();
        let avg = q_functional_average(&sys, &q, 11, 200_000).unwrap();
        assert!((avg - 1.0).abs() < 1e-2, "avg {avg}");
    }

    #[test]
    fn pipeline_flags_affine_family_rigid() {
        let report = rigidity_pipeline(&affine_pair(), 512, 3, 5e-3).unwrap();
        assert!(report.rigid);
        assert!(report.defect.abs() < 1e-6, "defect {}", report.defect);
        for &(_, sup) in report.affine_residuals.as_ref().unwrap() {
            assert!(sup < 1e-6);
        }
        for &d in &report.per_map_invariance_defect {
            assert!(d < 1e-9);
        }
        // for affine generators the recovered conjugacy is the identity
        let h = report.conjugacy.as_ref().unwrap();
        for j in 0..=64 {
            let x = j as f64 / 64.0;
            assert!((h.eval(x) - x).abs() < 1e-8);
        }
    }

    #[test]
    fn pipeline_flags_perturbed_map_nonrigid() {
        let report = rigidity_pipeline(&crate::transfer::tests::registered_perturbed(), 1024, 3, 5e-3).unwrap();
        assert!(!report.rigid);
        assert!(report.defect > 1e-3, "defect {}", report.defect);
        assert!(report.conjugacy.is_none());
    }

    #[test]
    fn conjugated_system_roundtrip_fits_tightly() {
        let h0 = TrigDiffeo::new(vec![TrigTerm(1, 0.05 / TAU, 0.0)]).unwrap();
        let (sys, residuals) = conjugated_system(&affine_pair(), &h0, 16, 1024, 1e-8).unwrap();
        assert_eq!(sys.maps().len(), 2);
        for &r in &residuals {
            assert!(r < 1e-8);
        }
        // Exponent is a conjugacy invariant.
        let est = lyapunov_birkhoff(&sys, 17, 8, 50_000, 500).unwrap();
        let expected = 0.8958797346140276;
        assert!((est.value - expected).abs() < 3.0 * est.stderr + 2e-4, "{}", est.value);
    }
}

//! Shared fixtures for the integration suites: the pre-registered test
//! systems and a seeded generator of certified random expanding systems.

// each test binary uses its own subset of these fixtures
#![allow(dead_code)]

use rigidity_core::circle::{ExpandingCircleMap, RandomCircleSystem, TrigTerm};
use rigidity_core::cocycle::{ConePair, IntMatrix};
use rigidity_core::rng::{derive_stream, StreamPurpose};
use rigidity_core::torus::{
    conjugated_toral_map, PerturbedToralMap, RandomToralSystem, Term2, TrigDiffeo2, TrigPoly2,
};
use rand::Rng;
use std::f64::consts::TAU;

/// log((3 + sqrt 5)/2), the cat map's top exponent.
pub const CAT_TOP: f64 = 0.962_423_650_119_206_9;

pub const LN2: f64 = std::f64::consts::LN_2;

/// Pre-registered perturbed circle system: degree 3, P(x) = 0.3 sin(2 pi x).
/// Certified margin ~ 0.112; exponent defect ~ 0.386 (calibration run).
pub fn registered_circle_system() -> RandomCircleSystem<f64> {
    let map = ExpandingCircleMap::new(3, 0.0, vec![TrigTerm(1, 0.3, 0.0)]).unwrap();
    RandomCircleSystem::single(map).unwrap()
}

pub fn affine_pair() -> RandomCircleSystem<f64> {
    RandomCircleSystem::new(
        vec![
            ExpandingCircleMap::affine(2, 0.3).unwrap(),
            ExpandingCircleMap::affine(3, 0.7).unwrap(),
        ],
        vec![0.5, 0.5],
    )
    .unwrap()
}

/// The planted circle conjugacy of the round-trip criterion:
/// h0(x) = x + 0.05 sin(2 pi x)/(2 pi).
pub fn planted_h0() -> rigidity_core::rigidity::TrigDiffeo<f64> {
    rigidity_core::rigidity::TrigDiffeo::new(vec![TrigTerm(1, 0.05 / TAU, 0.0)]).unwrap()
}

pub fn cat_matrix() -> IntMatrix {
    IntMatrix::from_2x2(2, 1, 1, 1)
}

/// Cones adapted to the cat map's eigendirections; the pre-registered
/// eps = 0.05 perturbations need them (quadrant cones are too wide for
/// pointwise expansion once det Df wanders from 1).
pub fn cat_cones() -> ConePair<f64> {
    ConePair::Axial {
        unstable_axis: [1.0, 0.618_033_988_749_894_9],
        stable_axis: [1.0, -1.618_033_988_749_895],
        kappa: 0.3,
    }
}

/// Pre-registered eps-perturbation of the cat map: g = (sin 2py, cos 2px).
pub fn perturbed_cat(eps: f64) -> PerturbedToralMap<f64> {
    PerturbedToralMap::linear_cat(
        eps,
        [
            TrigPoly2::new(vec![Term2(0, 1, 1.0, 0.0)]),
            TrigPoly2::new(vec![Term2(1, 0, 0.0, 1.0)]),
        ],
    )
    .unwrap()
}

/// Second, independent perturbation for the dispersion tests:
/// g = (cos 2px, sin 2py).
pub fn other_perturbed_cat(eps: f64) -> PerturbedToralMap<f64> {
    PerturbedToralMap::linear_cat(
        eps,
        [
            TrigPoly2::new(vec![Term2(1, 0, 0.0, 1.0)]),
            TrigPoly2::new(vec![Term2(0, 1, 1.0, 0.0)]),
        ],
    )
    .unwrap()
}

/// Planted toral conjugacy phi = id + c (sin 2py, sin 2px).
pub fn planted_phi(c: f64) -> TrigDiffeo2<f64> {
    TrigDiffeo2::new([
        TrigPoly2::new(vec![Term2(0, 1, c, 0.0)]),
        TrigPoly2::new(vec![Term2(1, 0, c, 0.0)]),
    ])
    .unwrap()
}

/// Rigid family phi^{-1}(A + v_i)phi with v_1 = 0, v_2 = (0.3, 0.7).
pub fn rigid_torus_family(c: f64) -> (RandomToralSystem<f64>, Vec<f64>) {
    let phi = planted_phi(c);
    let (f1, r1) = conjugated_toral_map(cat_matrix(), [0.0, 0.0], &phi, 8, 64, 1e-8).unwrap();
    let (f2, r2) = conjugated_toral_map(cat_matrix(), [0.3, 0.7], &phi, 8, 64, 1e-8).unwrap();
    let sys =
        RandomToralSystem::new(vec![f1, f2], vec![0.5, 0.5], ConePair::Quadrant).unwrap();
    (sys, vec![r1, r2])
}

/// Seeded random expanding system with certified margin >= 0.1.
/// Degrees live in {+-2, +-3} and coefficients are halved until the
/// certificate clears the margin, so generation is deterministic and total.
pub fn random_certified_system(master_seed: u64, index: u64) -> RandomCircleSystem<f64> {
    let mut rng = derive_stream(master_seed, StreamPurpose::SystemDraw, index);
    let n_maps = 1 + (rng.gen::<f64>() * 3.0) as usize;
    let mut maps = Vec::with_capacity(n_maps);
    for _ in 0..n_maps {
        let abs_degree = if rng.gen::<f64>() < 0.5 { 2i64 } else { 3 };
        let degree = if rng.gen::<f64>() < 0.15 { -abs_degree } else { abs_degree };
        let rotation = rng.gen::<f64>();
        let n_terms = (rng.gen::<f64>() * 3.0) as usize;
        let mut terms = Vec::with_capacity(n_terms);
        for _ in 0..n_terms {
            let k = 1 + (rng.gen::<f64>() * 3.0) as u32;
            let scale = 0.5 / (TAU * k as f64 * n_terms.max(1) as f64);
            let a = (2.0 * rng.gen::<f64>() - 1.0) * scale;
            let b = (2.0 * rng.gen::<f64>() - 1.0) * scale;
            terms.push(TrigTerm(k, a, b));
        }
        // shrink until the certificate clears margin 0.1
        loop {
            let map = ExpandingCircleMap::new(degree, rotation, terms.clone()).unwrap();
            let cert = map.certify_expanding(4096).unwrap();
            if cert.margin >= 0.1 {
                maps.push(map);
                break;
            }
            for t in &mut terms {
                *t = TrigTerm(t.k(), t.a() / 2.0, t.b() / 2.0);
            }
        }
    }
    let raw: Vec<f64> = (0..n_maps).map(|_| rng.gen::<f64>() + 0.2).collect();
    let total: f64 = raw.iter().sum();
    let probs = raw.into_iter().map(|p| p / total).collect();
    RandomCircleSystem::new(maps, probs).unwrap()
}

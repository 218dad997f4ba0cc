//! Cone certificates for the perturbed maps, on a grid with an analytic
//! Lipschitz margin.
//!
//! Cone hyperbolicity is a C^1-open property; here openness is made
//! quantitative. `Df` is sampled at grid nodes and every bound carries the
//! worst-case variation `delta = Lip(Df) * h * sqrt(2)/2` between a node and
//! the farthest point of its cell, so a passing certificate covers the whole
//! torus, not just the sample points.
//!
//! The backward cone goes through the adjugate: for 2x2 matrices
//! `adj(J + E) = adj(J) + adj(E)` with `||adj(E)|| = ||E||`, so the adjugate
//! inherits the Lipschitz constant of `Df` directly and the margins stay
//! first order in `delta` even where `det Df` is small. Directions of
//! `J^{-1} r` and `adj(J) r` agree as lines.

use serde::{Deserialize, Serialize};

use super::{mat_norm, Mat2, RandomToralSystem};
use crate::cocycle::sector_form_min;
use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PerturbedConeCertificate<R> {
    pub ok: bool,
    /// log of the certified uniform expansion over both cones, all maps,
    /// and the whole torus.
    pub gamma: R,
    pub grid_n: usize,
}

fn gram<R: Real>(m: &Mat2<R>) -> Mat2<R> {
    [
        [
            m[0][0] * m[0][0] + m[1][0] * m[1][0],
            m[0][0] * m[0][1] + m[1][0] * m[1][1],
        ],
        [
            m[0][0] * m[0][1] + m[1][0] * m[1][1],
            m[0][1] * m[0][1] + m[1][1] * m[1][1],
        ],
    ]
}

/// Does the (line-)direction of `w` sit inside the open sector `(lo, hi)`
/// with angular margin `margin`?
fn inside_sector_with_margin<R: Real>(w: [R; 2], lo: R, hi: R, margin: R) -> bool {
    let pi = R::of(std::f64::consts::PI);
    let mut th = w[1].atan2(w[0]);
    while th < lo {
        th = th + pi;
    }
    while th >= lo + pi {
        th = th - pi;
    }
    th > lo + margin && th < hi - margin
}

/// Certify `Df_x(C^u) in C^u` with expansion and `Df_x^{-1}(C^s) in C^s`
/// with expansion, for every map, at every grid node, with Lipschitz margins.
pub fn certify_perturbed_cones<R: Real>(
    system: &RandomToralSystem<R>,
    grid_n: usize,
) -> Result<PerturbedConeCertificate<R>> {
    if grid_n < 64 {
        return Err(Error::InvalidParameter("cone grid needs >= 64 points per axis".into()));
    }
    let cones = system.cones();
    let (ulo, uhi) = cones.unstable_sector();
    let (slo, shi) = cones.stable_sector();
    let h_cover = R::of(std::f64::consts::SQRT_2 / 2.0) / R::of_usize(grid_n);
    let mut worst = R::infinity();

    for (idx, map) in system.maps().iter().enumerate() {
        let delta = map.dlip_bound() * h_cover;
        for gi in 0..grid_n {
            for gj in 0..grid_n {
                let x = [
                    R::of_usize(gi) / R::of_usize(grid_n),
                    R::of_usize(gj) / R::of_usize(grid_n),
                ];
                let j = map.jacobian(x);
                let adj = [[j[1][1], -j[0][1]], [-j[1][0], j[0][0]]];
                let det = (j[0][0] * j[1][1] - j[0][1] * j[1][0]).abs();
                let det_slack = R::of(2.0) * (mat_norm(&j) + delta) * delta;
                let violation = || Error::ConeViolation {
                    map_index: idx,
                    x: x[0].as_f64(),
                    y: x[1].as_f64(),
                };
                // Df must stay invertible across the cell
                if !(det - det_slack > R::zero()) {
                    return Err(violation());
                }

                // forward cone inclusion with margin
                for bound in [ulo, uhi] {
                    let (s, c) = bound.sin_cos();
                    let w = [j[0][0] * c + j[0][1] * s, j[1][0] * c + j[1][1] * s];
                    let wn = w[0].hypot(w[1]);
                    if !(delta < wn) {
                        return Err(violation());
                    }
                    let ang_margin = (delta / wn).asin();
                    if !inside_sector_with_margin(w, ulo, uhi, ang_margin) {
                        return Err(violation());
                    }
                }
                // backward cone inclusion through the adjugate
                for bound in [slo, shi] {
                    let (s, c) = bound.sin_cos();
                    let w = [
                        adj[0][0] * c + adj[0][1] * s,
                        adj[1][0] * c + adj[1][1] * s,
                    ];
                    let wn = w[0].hypot(w[1]);
                    if !(delta < wn) {
                        return Err(violation());
                    }
                    let ang_margin = (delta / wn).asin();
                    if !inside_sector_with_margin(w, slo, shi, ang_margin) {
                        return Err(violation());
                    }
                }

                // certified expansions; ||J^{-1} v|| = ||adj(J) v|| / |det J|
                let mu = sector_form_min(gram(&j), ulo, uhi).sqrt() - delta;
                let ms = (sector_form_min(gram(&adj), slo, shi).sqrt() - delta) / (det + det_slack);
                worst = worst.min(mu).min(ms);
            }
        }
    }
    Ok(PerturbedConeCertificate { ok: worst > R::one(), gamma: worst.ln(), grid_n })
}

//! Fiberwise stable/unstable directions and the non-randomness statistic.
//!
//! The unstable direction at `(omega, x)` is the nested-image limit of the
//! unstable cone along the past word; the stable direction mirrors it with
//! inverse derivatives along the future word. Cone contraction makes both
//! limits exponentially fast, so convergence is detected by the angle change
//! between successive depths.
//!
//! In the rigid (exponent-equality) case the stable direction is almost
//! surely independent of the driving word; `stable_bundle_dispersion` turns
//! that into a measurable statistic.

use rayon::prelude::*;

use super::{mat_inv, mat_vec, Mat2, RandomToralSystem};
use crate::error::{Error, Result};
use crate::rng::{self, StreamPurpose};
use crate::scalar::Real;

fn normalize<R: Real>(v: [R; 2]) -> [R; 2] {
    let n = v[0].hypot(v[1]);
    let w = [v[0] / n, v[1] / n];
    // canonical sign for a line direction
    if w[0] < R::zero() || (w[0] == R::zero() && w[1] < R::zero()) {
        [-w[0], -w[1]]
    } else {
        w
    }
}

/// Angle between two lines (directions mod sign), in `[0, pi/2]`.
/// atan2 of the cross/dot pair stays accurate for nearly parallel lines,
/// where acos of the dot product loses half the digits.
pub fn line_angle<R: Real>(u: [R; 2], v: [R; 2]) -> R {
    let cross = (u[0] * v[1] - u[1] * v[0]).abs();
    let dot = (u[0] * v[0] + u[1] * v[1]).abs();
    cross.atan2(dot)
}

const CONVERGENCE_TOL: f64 = 1e-10;
const FAILURE_TOL: f64 = 1e-8;

/// Direction of `E^u` at `x` for the past word `past_word[0] = omega_{-1}`,
/// `past_word[1] = omega_{-2}`, ... (most recent first).
pub fn unstable_direction<R: Real>(
    system: &RandomToralSystem<R>,
    past_word: &[usize],
    x: [R; 2],
    depth: usize,
) -> Result<[R; 2]> {
    if depth < 20 {
        return Err(Error::InvalidParameter("depth must be >= 20".into()));
    }
    if past_word.len() < depth {
        return Err(Error::InvalidParameter("past word shorter than depth".into()));
    }
    // backward orbit: x_{-(i+1)} = f_{w[i]}^{-1}(x_{-i})
    let mut backward = Vec::with_capacity(depth + 1);
    backward.push(x);
    for &w in past_word.iter().take(depth) {
        let prev = system.maps()[w].inverse(*backward.last().unwrap())?;
        backward.push(prev);
    }
    // accumulate P_n = Df(x_{-1}) ... Df(x_{-n}) left-to-right, renormalized;
    // v_n = P_n v0 converges to E^u as the seed recedes into the past.
    let seed = normalize([R::one(), R::one()]);
    let mut p: Mat2<R> = [[R::one(), R::zero()], [R::zero(), R::one()]];
    let mut prev_dir: Option<[R; 2]> = None;
    let mut last_change = R::infinity();
    for n in 1..=depth {
        let j = system.maps()[past_word[n - 1]].jacobian(backward[n]);
        // p <- p * j (append deeper factor on the right)
        let q = [
            [
                p[0][0] * j[0][0] + p[0][1] * j[1][0],
                p[0][0] * j[0][1] + p[0][1] * j[1][1],
            ],
            [
                p[1][0] * j[0][0] + p[1][1] * j[1][0],
                p[1][0] * j[0][1] + p[1][1] * j[1][1],
            ],
        ];
        let scale = q[0][0].abs().max(q[0][1].abs()).max(q[1][0].abs()).max(q[1][1].abs());
        p = [
            [q[0][0] / scale, q[0][1] / scale],
            [q[1][0] / scale, q[1][1] / scale],
        ];
        let dir = normalize(mat_vec(&p, seed));
        if let Some(prev) = prev_dir {
            last_change = line_angle(prev, dir);
            if last_change < R::of(CONVERGENCE_TOL) {
                return Ok(dir);
            }
        }
        prev_dir = Some(dir);
    }
    if last_change < R::of(FAILURE_TOL) {
        Ok(prev_dir.unwrap())
    } else {
        Err(Error::NoConvergence { iterations: depth, residual: last_change.as_f64() })
    }
}

/// Direction of `E^s` at `x` for the future word `future_word[0] = omega_0`,
/// `future_word[1] = omega_1`, ...: nested inverse images of the stable cone.
pub fn stable_direction<R: Real>(
    system: &RandomToralSystem<R>,
    future_word: &[usize],
    x: [R; 2],
    depth: usize,
) -> Result<[R; 2]> {
    if depth < 20 {
        return Err(Error::InvalidParameter("depth must be >= 20".into()));
    }
    if future_word.len() < depth {
        return Err(Error::InvalidParameter("future word shorter than depth".into()));
    }
    let mut forward = Vec::with_capacity(depth + 1);
    forward.push(x);
    for &w in future_word.iter().take(depth) {
        let next = system.maps()[w].eval(*forward.last().unwrap());
        forward.push(next);
    }
    let seed = normalize([R::one(), -R::one()]);
    let mut p: Mat2<R> = [[R::one(), R::zero()], [R::zero(), R::one()]];
    let mut prev_dir: Option<[R; 2]> = None;
    let mut last_change = R::infinity();
    for n in 1..=depth {
        let jinv = mat_inv(&system.maps()[future_word[n - 1]].jacobian(forward[n - 1]));
        // (Df^n)^{-1} = Df(x_0)^{-1} ... Df(x_{n-1})^{-1}: append on the right
        let q = [
            [
                p[0][0] * jinv[0][0] + p[0][1] * jinv[1][0],
                p[0][0] * jinv[0][1] + p[0][1] * jinv[1][1],
            ],
            [
                p[1][0] * jinv[0][0] + p[1][1] * jinv[1][0],
                p[1][0] * jinv[0][1] + p[1][1] * jinv[1][1],
            ],
        ];
        let scale = q[0][0].abs().max(q[0][1].abs()).max(q[1][0].abs()).max(q[1][1].abs());
        p = [
            [q[0][0] / scale, q[0][1] / scale],
            [q[1][0] / scale, q[1][1] / scale],
        ];
        let dir = normalize(mat_vec(&p, seed));
        if let Some(prev) = prev_dir {
            last_change = line_angle(prev, dir);
            if last_change < R::of(CONVERGENCE_TOL) {
                return Ok(dir);
            }
        }
        prev_dir = Some(dir);
    }
    if last_change < R::of(FAILURE_TOL) {
        Ok(prev_dir.unwrap())
    } else {
        Err(Error::NoConvergence { iterations: depth, residual: last_change.as_f64() })
    }
}

#[derive(Clone, Copy, Debug)]
pub struct DispersionStats<R> {
    pub max_angle: R,
    pub mean_angle: R,
}

/// At `n_points` Lebesgue-random points, compute the stable direction under
/// `n_futures` independent future words and report the max and mean pairwise
/// line angles. Vanishes (up to solver tolerance) iff the stable bundle is
/// word-independent.
pub fn stable_bundle_dispersion<R: Real>(
    system: &RandomToralSystem<R>,
    seed: u64,
    n_points: usize,
    n_futures: usize,
    depth: usize,
) -> Result<DispersionStats<R>> {
    if n_points == 0 || n_futures < 2 {
        return Err(Error::InvalidParameter("need n_points >= 1 and n_futures >= 2".into()));
    }
    let per_point: Vec<Result<(R, R, usize)>> = (0..n_points)
        .into_par_iter()
        .map(|pt| {
            let mut prng = rng::derive_stream(seed, StreamPurpose::DispersionPoint, pt as u64);
            let x = [rng::uniform::<R>(&mut prng), rng::uniform::<R>(&mut prng)];
            let mut dirs = Vec::with_capacity(n_futures);
            for fu in 0..n_futures {
                let mut wrng = rng::derive_stream(
                    seed,
                    StreamPurpose::DispersionWord,
                    (pt * n_futures + fu) as u64,
                );
                let word: Vec<usize> = (0..depth)
                    .map(|_| rng::pick_index(&mut wrng, system.probs()))
                    .collect();
                dirs.push(stable_direction(system, &word, x, depth)?);
            }
            let mut max = R::zero();
            let mut sum = R::zero();
            let mut count = 0usize;
            for i in 0..dirs.len() {
                for j in i + 1..dirs.len() {
                    let a = line_angle(dirs[i], dirs[j]);
                    max = max.max(a);
                    sum += a;
                    count += 1;
                }
            }
            Ok((max, sum, count))
        })
        .collect();
    let mut max_angle = R::zero();
    let mut total = R::zero();
    let mut pairs = 0usize;
    for r in per_point {
        let (m, s, c) = r?;
        max_angle = max_angle.max(m);
        total += s;
        pairs += c;
    }
    Ok(DispersionStats { max_angle, mean_angle: total / R::of_usize(pairs) })
}

//! Annealed Ulam transfer operator on the circle.
//!
//! The stationary SRB density of a random expanding system is the fixed point
//! of the averaged transfer operator. We discretize with uniform half-open
//! bins `[j/N, (j+1)/N)`: each bin pushes the midpoints of `subdivisions`
//! equal sub-bins through every map, which makes each row exactly stochastic
//! (every sample lands in exactly one bin). The Lyapunov exponent of the
//! stationary measure is then computed two independent ways: quadrature
//! against the Ulam density and a seeded Birkhoff average along random
//! orbits.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circle::RandomCircleSystem;
use crate::error::{Error, Result};
use crate::rng::{self, StreamPurpose};
use crate::scalar::Real;
use crate::util::{frac, kahan_sum, mean_stderr, Kahan};

/// Row-stochastic transition matrix acting on bin mass vectors, stored sparse.
#[derive(Clone, Debug)]
pub struct UlamOperator<R> {
    n_bins: usize,
    rows: Vec<Vec<(u32, R)>>,
}

/// Discretized stationary density: nonnegative bin masses summing to one.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct UlamDensity<R> {
    n_bins: usize,
    mass: Vec<R>,
}

/// A Lyapunov exponent estimate in nats per step. `stderr` is zero and
/// `n_samples` zero for deterministic quadrature values.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct ExponentEstimate<R> {
    pub value: R,
    pub stderr: R,
    pub n_samples: u64,
}

fn bin_of<R: Real>(y: R, n_bins: usize) -> u32 {
    // Half-open convention: a point exactly on a boundary joins the bin to
    // its right. frac() guarantees y in [0,1); clamp guards the last ulp.
    let k = (y * R::of_usize(n_bins)).floor().as_f64() as usize;
    k.min(n_bins - 1) as u32
}

impl<R: Real> UlamOperator<R> {
    pub fn n_bins(&self) -> usize {
        self.n_bins
    }

    pub fn rows(&self) -> &[Vec<(u32, R)>] {
        &self.rows
    }

    /// Push a mass vector forward one step of the annealed chain.
    pub fn apply(&self, mass: &[R]) -> Vec<R> {
        assert_eq!(mass.len(), self.n_bins);
        let mut out = vec![R::zero(); self.n_bins];
        for (j, row) in self.rows.iter().enumerate() {
            let m = mass[j];
            if m == R::zero() {
                continue;
            }
            for &(k, w) in row {
                out[k as usize] += m * w;
            }
        }
        out
    }
}

/// Transition row counts for one map: `counts[j]` lists `(bin, hits)`.
fn map_rows<R: Real>(
    map: &crate::circle::ExpandingCircleMap<R>,
    n_bins: usize,
    subdivisions: usize,
) -> Vec<Vec<(u32, u32)>> {
    (0..n_bins)
        .into_par_iter()
        .map(|j| {
            let mut counts: Vec<(u32, u32)> = Vec::with_capacity(subdivisions.min(8));
            let nb = R::of_usize(n_bins);
            let sb = R::of_usize(subdivisions);
            for s in 0..subdivisions {
                let x = (R::of_usize(j) + (R::of_usize(s) + R::of(0.5)) / sb) / nb;
                let k = bin_of(frac(map.eval_lift(x)), n_bins);
                match counts.iter_mut().find(|(kk, _)| *kk == k) {
                    Some((_, c)) => *c += 1,
                    None => counts.push((k, 1)),
                }
            }
            counts.sort_unstable_by_key(|&(k, _)| k);
            counts
        })
        .collect()
}

/// Ulam matrix of a single map (probability one on that map).
pub fn build_map_ulam<R: Real>(
    map: &crate::circle::ExpandingCircleMap<R>,
    n_bins: usize,
    subdivisions: usize,
) -> Result<UlamOperator<R>> {
    check_ulam_params(n_bins, subdivisions)?;
    map.certify_expanding(crate::circle::CERT_GRID)?
        .require()
        .map_err(|_| Error::InvalidSystem("map fails the expansion certificate".into()))?;
    let sb = R::of_usize(subdivisions);
    let rows = map_rows(map, n_bins, subdivisions)
        .into_iter()
        .map(|counts| {
            counts
                .into_iter()
                .map(|(k, c)| (k, R::of_usize(c as usize) / sb))
                .collect()
        })
        .collect();
    Ok(UlamOperator { n_bins, rows })
}

fn check_ulam_params(n_bins: usize, subdivisions: usize) -> Result<()> {
    if n_bins < 2 {
        return Err(Error::InvalidParameter("n_bins must be >= 2".into()));
    }
    if subdivisions < 1 {
        return Err(Error::InvalidParameter("subdivisions must be >= 1".into()));
    }
    Ok(())
}

/// Annealed operator: the probability-weighted average of the per-map Ulam
/// matrices. Rows sum to one by construction.
pub fn build_annealed_ulam<R: Real>(
    system: &RandomCircleSystem<R>,
    n_bins: usize,
    subdivisions: usize,
) -> Result<UlamOperator<R>> {
    check_ulam_params(n_bins, subdivisions)?;
    let sb = R::of_usize(subdivisions);
    let mut rows: Vec<Vec<(u32, R)>> = vec![Vec::new(); n_bins];
    for (map, &p) in system.maps().iter().zip(system.probs()) {
        let w = p / sb;
        for (j, counts) in map_rows(map, n_bins, subdivisions).into_iter().enumerate() {
            for (k, c) in counts {
                let add = w * R::of_usize(c as usize);
                match rows[j].iter_mut().find(|(kk, _)| *kk == k) {
                    Some((_, v)) => *v += add,
                    None => rows[j].push((k, add)),
                }
            }
        }
    }
    for row in &mut rows {
        row.sort_unstable_by_key(|&(k, _)| k);
    }
    Ok(UlamOperator { n_bins, rows })
}

impl<R: Real> UlamDensity<R> {
    pub fn uniform(n_bins: usize) -> Self {
        UlamDensity { n_bins, mass: vec![R::one() / R::of_usize(n_bins); n_bins] }
    }

    pub fn from_mass(mass: Vec<R>) -> Result<Self> {
        let n_bins = mass.len();
        if n_bins == 0 {
            return Err(Error::InvalidParameter("empty density".into()));
        }
        let total = kahan_sum(mass.iter().copied());
        if (total - R::one()).abs() > R::of(1e-10) || mass.iter().any(|&m| m < R::zero()) {
            return Err(Error::InvalidParameter("masses must be >= 0 and sum to 1".into()));
        }
        Ok(UlamDensity { n_bins, mass })
    }

    pub fn n_bins(&self) -> usize {
        self.n_bins
    }

    pub fn mass(&self) -> &[R] {
        &self.mass
    }

    /// Piecewise-constant density value at a circle point.
    pub fn value_at(&self, x: R) -> R {
        let j = bin_of(frac(x), self.n_bins) as usize;
        self.mass[j] * R::of_usize(self.n_bins)
    }

    pub fn min_mass(&self) -> R {
        self.mass.iter().copied().fold(R::infinity(), |a, b| a.min(b))
    }

    pub fn max_mass(&self) -> R {
        self.mass.iter().copied().fold(R::neg_infinity(), |a, b| a.max(b))
    }

    /// Inverse-CDF sample of the piecewise-constant density.
    pub fn sample_point(&self, u: R) -> R {
        let mut acc = R::zero();
        let n = R::of_usize(self.n_bins);
        for (j, &m) in self.mass.iter().enumerate() {
            let next = acc + m;
            if u < next || j + 1 == self.n_bins {
                let inner = if m > R::zero() { (u - acc) / m } else { R::of(0.5) };
                return (R::of_usize(j) + inner.max(R::zero()).min(R::one())) / n;
            }
            acc = next;
        }
        unreachable!("cdf covers [0,1)")
    }

    pub fn l1_distance(&self, other: &UlamDensity<R>) -> R {
        assert_eq!(self.n_bins, other.n_bins);
        kahan_sum(self.mass.iter().zip(&other.mass).map(|(&a, &b)| (a - b).abs()))
    }
}

/// Power iteration for the stationary density. Returns a fixed point with
/// `||q U - q||_1 < tol`, normalized to total mass one.
pub fn stationary_density<R: Real>(
    op: &UlamOperator<R>,
    tol: R,
    max_iters: usize,
) -> Result<UlamDensity<R>> {
    if !(tol > R::zero()) || tol > R::of(1e-3) {
        return Err(Error::InvalidParameter("tol must lie in (0, 1e-3]".into()));
    }
    if max_iters < 100 {
        return Err(Error::InvalidParameter("max_iters must be >= 100".into()));
    }
    let mut cur = vec![R::one() / R::of_usize(op.n_bins); op.n_bins];
    let mut residual = R::infinity();
    for _ in 0..max_iters {
        let mut next = op.apply(&cur);
        let total = kahan_sum(next.iter().copied());
        for v in &mut next {
            *v = *v / total;
        }
        residual = kahan_sum(cur.iter().zip(&next).map(|(&a, &b)| (a - b).abs()));
        cur = next;
        if residual < tol {
            return Ok(UlamDensity { n_bins: op.n_bins, mass: cur });
        }
    }
    Err(Error::NoConvergence { iterations: max_iters, residual: residual.as_f64() })
}

/// Deterministic exponent: `sum_i p_i sum_j q_j log |f_i'(midpoint_j)|`.
pub fn lyapunov_quadrature<R: Real>(
    system: &RandomCircleSystem<R>,
    q: &UlamDensity<R>,
) -> ExponentEstimate<R> {
    let n = q.n_bins();
    let nb = R::of_usize(n);
    let mut total = Kahan::new();
    for (map, &p) in system.maps().iter().zip(system.probs()) {
        let mut inner = Kahan::new();
        for j in 0..n {
            let x = (R::of_usize(j) + R::of(0.5)) / nb;
            inner.add(q.mass()[j] * map.derivative(x).abs().ln());
        }
        total.add(p * inner.value());
    }
    ExponentEstimate { value: total.value(), stderr: R::zero(), n_samples: 0 }
}

/// Seeded Birkhoff estimate of the exponent: per-orbit averages of
/// `log |f'|` along the random walk, reduced in fixed orbit order.
pub fn lyapunov_birkhoff<R: Real>(
    system: &RandomCircleSystem<R>,
    seed: u64,
    n_orbits: usize,
    n_steps: usize,
    burn_in: usize,
) -> Result<ExponentEstimate<R>> {
    if n_orbits < 8 {
        return Err(Error::InvalidParameter("n_orbits must be >= 8".into()));
    }
    if n_steps < 1_000 {
        return Err(Error::InvalidParameter("n_steps must be >= 1000".into()));
    }
    if burn_in < 100 {
        return Err(Error::InvalidParameter("burn_in must be >= 100".into()));
    }
    let means: Vec<R> = (0..n_orbits)
        .into_par_iter()
        .map(|orbit| {
            let mut rng = rng::derive_stream(seed, StreamPurpose::BirkhoffOrbit, orbit as u64);
            let mut x: R = rng::uniform(&mut rng);
            for _ in 0..burn_in {
                let i = rng::pick_index(&mut rng, system.probs());
                x = system.maps()[i].eval_circle(x);
            }
            let mut acc = Kahan::new();
            for _ in 0..n_steps {
                let i = rng::pick_index(&mut rng, system.probs());
                acc.add(system.maps()[i].derivative(x).abs().ln());
                x = system.maps()[i].eval_circle(x);
            }
            acc.value() / R::of_usize(n_steps)
        })
        .collect();
    let (value, stderr) = mean_stderr(&means);
    Ok(ExponentEstimate { value, stderr, n_samples: (n_orbits * n_steps) as u64 })
}

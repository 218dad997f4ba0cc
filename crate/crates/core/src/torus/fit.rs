//! Planted conjugacies on the torus and the trig refit that keeps
//! `phi^{-1} . (A + v) . phi` inside the [`PerturbedToralMap`] family.
//!
//! The conjugated map differs from `A x + v` by a Z^2-periodic analytic
//! field, so a discrete Fourier projection with a modest number of harmonics
//! reproduces it to near machine precision; the achieved sup residual on a
//! finer grid is checked against a hard limit and returned.

use super::{PerturbedToralMap, Term2, TrigPoly2};
use crate::cocycle::IntMatrix;
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::util::frac;

/// Torus diffeomorphism `phi(x) = x + psi(x)` with trig displacement,
/// invertible because `sup ||D psi|| < 1`.
#[derive(Clone, Debug)]
pub struct TrigDiffeo2<R> {
    psi: [TrigPoly2<R>; 2],
}

impl<R: Real> TrigDiffeo2<R> {
    pub fn new(psi: [TrigPoly2<R>; 2]) -> Result<Self> {
        let bx = psi[0].c1_bound();
        let by = psi[1].c1_bound();
        if !((bx * bx + by * by).sqrt() < R::one()) {
            return Err(Error::InvalidParameter(
                "displacement must satisfy sup ||D psi|| < 1".into(),
            ));
        }
        Ok(TrigDiffeo2 { psi })
    }

    pub fn psi(&self) -> &[TrigPoly2<R>; 2] {
        &self.psi
    }

    /// Lift value `x + psi(x)` (psi evaluated on reduced arguments).
    pub fn eval_lift(&self, x: [R; 2]) -> [R; 2] {
        [x[0] + self.psi[0].eval(x), x[1] + self.psi[1].eval(x)]
    }

    pub fn eval(&self, x: [R; 2]) -> [R; 2] {
        let y = self.eval_lift(x);
        [frac(y[0]), frac(y[1])]
    }

    /// Lift of the inverse by the contraction `z -> y - psi(z)`.
    pub fn inverse_lift(&self, y: [R; 2]) -> [R; 2] {
        let mut z = y;
        for _ in 0..200 {
            let next = [y[0] - self.psi[0].eval(z), y[1] - self.psi[1].eval(z)];
            let d = (next[0] - z[0]).abs().max((next[1] - z[1]).abs());
            z = next;
            if d < R::of(1e-16) {
                break;
            }
        }
        z
    }

    pub fn jacobian(&self, x: [R; 2]) -> super::Mat2<R> {
        let g0 = self.psi[0].grad(x);
        let g1 = self.psi[1].grad(x);
        [[R::one() + g0[0], g0[1]], [g1[0], R::one() + g1[1]]]
    }
}

/// Project a sampled periodic residual field onto trig polynomials with
/// `|k1|, |k2| <= harmonics` and verify the sup error on a 2x finer grid.
pub fn fit_toral_map<R: Real>(
    linear: IntMatrix,
    sample_lift: impl Fn([R; 2]) -> [R; 2],
    harmonics: usize,
    fit_grid: usize,
    max_residual: R,
) -> Result<(PerturbedToralMap<R>, R)> {
    let m = fit_grid;
    let mf = R::of_usize(m);
    let tau = R::tau();
    let a = |i: usize, j: usize| R::of(linear.get(i, j) as f64);

    // residual field r(x) = sample(x) - A x on the m x m grid
    let mut r = vec![[R::zero(); 2]; m * m];
    let mut mean = [R::zero(); 2];
    for i in 0..m {
        for j in 0..m {
            let x = [R::of_usize(i) / mf, R::of_usize(j) / mf];
            let s = sample_lift(x);
            let ax = [a(0, 0) * x[0] + a(0, 1) * x[1], a(1, 0) * x[0] + a(1, 1) * x[1]];
            let v = [s[0] - ax[0], s[1] - ax[1]];
            r[i * m + j] = v;
            mean[0] += v[0];
            mean[1] += v[1];
        }
    }
    let count = R::of_usize(m * m);
    mean = [mean[0] / count, mean[1] / count];

    // DFT coefficients over the representative half-plane of frequencies
    let k_max = harmonics as i32;
    let mut polys = [Vec::new(), Vec::new()];
    for k1 in 0..=k_max {
        let k2_range = if k1 == 0 { 1..=k_max } else { -k_max..=k_max };
        for k2 in k2_range {
            let mut re = [R::zero(); 2];
            let mut im = [R::zero(); 2];
            for i in 0..m {
                for j in 0..m {
                    let ang = tau
                        * (R::of(k1 as f64) * R::of_usize(i) / mf
                            + R::of(k2 as f64) * R::of_usize(j) / mf);
                    let (s, c) = ang.sin_cos();
                    for comp in 0..2 {
                        let v = r[i * m + j][comp] - mean[comp];
                        re[comp] += v * c;
                        im[comp] -= v * s;
                    }
                }
            }
            let two_over = R::of(2.0) / count;
            for comp in 0..2 {
                let b = re[comp] * two_over;
                let aa = -(im[comp] * two_over);
                // drop DFT noise; the residual check below guards correctness
                if aa.abs() + b.abs() > R::of(1e-14) {
                    polys[comp].push(Term2(k1, k2, aa, b));
                }
            }
        }
    }
    let translation = [frac(mean[0]), frac(mean[1])];
    let offset = [mean[0] - translation[0], mean[1] - translation[1]];
    let map = PerturbedToralMap::new(
        linear,
        translation,
        R::one(),
        [TrigPoly2::new(polys[0].clone()), TrigPoly2::new(polys[1].clone())],
    )?;

    // verification on a 2x finer grid
    let fine = 2 * m;
    let ff = R::of_usize(fine);
    let mut worst = R::zero();
    for i in 0..fine {
        for j in 0..fine {
            let x = [R::of_usize(i) / ff, R::of_usize(j) / ff];
            let s = sample_lift(x);
            let fitted = map.lift(x);
            let e0 = (s[0] - offset[0] - fitted[0]).abs();
            let e1 = (s[1] - offset[1] - fitted[1]).abs();
            worst = worst.max(e0).max(e1);
        }
    }
    if worst > max_residual {
        return Err(Error::FitResidual { residual: worst.as_f64(), limit: max_residual.as_f64() });
    }
    Ok((map, worst))
}

/// Build `phi^{-1} . (A + v) . phi` as a perturbed toral map by sampling its
/// lift and refitting.
pub fn conjugated_toral_map<R: Real>(
    linear: IntMatrix,
    v: [R; 2],
    phi: &TrigDiffeo2<R>,
    harmonics: usize,
    fit_grid: usize,
    max_residual: R,
) -> Result<(PerturbedToralMap<R>, R)> {
    let a = linear.clone();
    let sample = |x: [R; 2]| -> [R; 2] {
        let px = phi.eval_lift(x);
        let apx = a.apply_vec(&[px[0], px[1]]);
        let y = [apx[0] + v[0], apx[1] + v[1]];
        phi.inverse_lift(y)
    };
    fit_toral_map(linear, sample, harmonics, fit_grid, max_residual)
}

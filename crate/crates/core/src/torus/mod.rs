//! Random compositions of perturbed hyperbolic toral automorphisms on T^2.
//!
//! A fiber map is `f(x) = A x + v + eps * g(x) mod Z^2` with `A` a hyperbolic
//! unimodular integer matrix and `g` a pair of Z^2-periodic trigonometric
//! polynomials, so derivatives and all C^1/C^2 bounds are exact in the
//! coefficients. Cone preservation is certified on a grid with a
//! Lipschitz-of-Df margin, never assumed.

mod bundles;
mod conjugacy;
mod exponents;
mod fit;
mod grid_cones;

pub use bundles::{stable_bundle_dispersion, stable_direction, unstable_direction, DispersionStats};
pub use conjugacy::{
    conjugacy_residual, conjugate_map_grid, solve_linear_conjugacy, verify_translation,
    ConjugacyGrid, TranslationCheck,
};
pub use exponents::srb_exponents;
pub use fit::{conjugated_toral_map, fit_toral_map, TrigDiffeo2};
pub use grid_cones::{certify_perturbed_cones, PerturbedConeCertificate};

use serde::{Deserialize, Serialize};

use crate::cocycle::{certify_cone_hyperbolic, ConePair, IntMatrix, MatrixFamily};
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::util::frac;

/// One 2D Fourier term `a sin(2 pi k.x) + b cos(2 pi k.x)`;
/// serializes as `[k1, k2, a, b]`.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct Term2<R>(pub i32, pub i32, pub R, pub R);

impl<R: Real> Term2<R> {
    pub fn k(&self) -> [i32; 2] {
        [self.0, self.1]
    }
    pub fn a(&self) -> R {
        self.2
    }
    pub fn b(&self) -> R {
        self.3
    }
    fn knorm(&self) -> R {
        let (k1, k2) = (self.0 as f64, self.1 as f64);
        R::of(k1.hypot(k2))
    }
}

/// Real trigonometric polynomial on the 2-torus.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct TrigPoly2<R> {
    pub terms: Vec<Term2<R>>,
}

impl<R: Real> TrigPoly2<R> {
    pub fn new(terms: Vec<Term2<R>>) -> Self {
        TrigPoly2 { terms }
    }

    pub fn eval(&self, x: [R; 2]) -> R {
        let tau = R::tau();
        let (xf, yf) = (frac(x[0]), frac(x[1]));
        let mut acc = R::zero();
        for t in &self.terms {
            let ang = tau * (R::of(t.0 as f64) * xf + R::of(t.1 as f64) * yf);
            let (s, c) = ang.sin_cos();
            acc = acc + t.a() * s + t.b() * c;
        }
        acc
    }

    /// Gradient, exact from the coefficients.
    pub fn grad(&self, x: [R; 2]) -> [R; 2] {
        let tau = R::tau();
        let (xf, yf) = (frac(x[0]), frac(x[1]));
        let mut g = [R::zero(); 2];
        for t in &self.terms {
            let ang = tau * (R::of(t.0 as f64) * xf + R::of(t.1 as f64) * yf);
            let (s, c) = ang.sin_cos();
            let common = t.a() * c - t.b() * s;
            g[0] = g[0] + tau * R::of(t.0 as f64) * common;
            g[1] = g[1] + tau * R::of(t.1 as f64) * common;
        }
        g
    }

    /// `sup |grad| <= sum 2 pi |k| (|a| + |b|)`.
    pub fn c1_bound(&self) -> R {
        self.terms
            .iter()
            .fold(R::zero(), |acc, t| acc + R::tau() * t.knorm() * (t.a().abs() + t.b().abs()))
    }

    /// `sup ||Hessian|| <= sum (2 pi |k|)^2 (|a| + |b|)`.
    pub fn c2_bound(&self) -> R {
        self.terms.iter().fold(R::zero(), |acc, t| {
            let w = R::tau() * t.knorm();
            acc + w * w * (t.a().abs() + t.b().abs())
        })
    }
}

pub type Mat2<R> = [[R; 2]; 2];

pub fn mat_vec<R: Real>(m: &Mat2<R>, v: [R; 2]) -> [R; 2] {
    [m[0][0] * v[0] + m[0][1] * v[1], m[1][0] * v[0] + m[1][1] * v[1]]
}

pub fn mat_inv<R: Real>(m: &Mat2<R>) -> Mat2<R> {
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    [[m[1][1] / det, -m[0][1] / det], [-m[1][0] / det, m[0][0] / det]]
}

pub fn mat_norm<R: Real>(m: &Mat2<R>) -> R {
    // spectral norm of a 2x2 matrix via the Gram eigenvalues
    let g11 = m[0][0] * m[0][0] + m[1][0] * m[1][0];
    let g22 = m[0][1] * m[0][1] + m[1][1] * m[1][1];
    let g12 = m[0][0] * m[0][1] + m[1][0] * m[1][1];
    let half = (g11 + g22) / R::of(2.0);
    let rad = ((g11 - g22) * (g11 - g22) / R::of(4.0) + g12 * g12).sqrt();
    (half + rad).sqrt()
}

/// `f(x) = A x + v + eps g(x) mod Z^2`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PerturbedToralMap<R> {
    linear: IntMatrix,
    translation: [R; 2],
    epsilon: R,
    perturbation: [TrigPoly2<R>; 2],
}

impl<R: Real> PerturbedToralMap<R> {
    pub fn new(
        linear: IntMatrix,
        translation: [R; 2],
        epsilon: R,
        perturbation: [TrigPoly2<R>; 2],
    ) -> Result<Self> {
        if linear.dim() != 2 {
            return Err(Error::DimensionUnsupported { dim: linear.dim(), min: 2, max: 2 });
        }
        if !linear.is_unimodular() {
            return Err(Error::InvalidParameter("linear part must have |det| = 1".into()));
        }
        // exact 2x2 hyperbolicity: real distinct spectrum off the unit circle
        let t = linear.trace() as i128;
        let det = linear.det()?;
        if t * t - 4 * det <= 0 || 1 - t + det == 0 || 1 + t + det == 0 {
            return Err(Error::InvalidParameter("linear part must be hyperbolic".into()));
        }
        for c in translation {
            if !(c >= R::zero() && c < R::one()) {
                return Err(Error::InvalidParameter("translation must lie in [0,1)^2".into()));
            }
        }
        if epsilon < R::zero() {
            return Err(Error::InvalidParameter("epsilon must be >= 0".into()));
        }
        Ok(PerturbedToralMap { linear, translation, epsilon, perturbation })
    }

    pub fn linear_cat(epsilon: R, perturbation: [TrigPoly2<R>; 2]) -> Result<Self> {
        Self::new(IntMatrix::from_2x2(2, 1, 1, 1), [R::zero(); 2], epsilon, perturbation)
    }

    pub fn linear(&self) -> &IntMatrix {
        &self.linear
    }

    pub fn translation(&self) -> [R; 2] {
        self.translation
    }

    pub fn epsilon(&self) -> R {
        self.epsilon
    }

    pub fn perturbation(&self) -> &[TrigPoly2<R>; 2] {
        &self.perturbation
    }

    /// Lipschitz bound for `x -> Df(x)`.
    pub fn dlip_bound(&self) -> R {
        let bx = self.perturbation[0].c2_bound();
        let by = self.perturbation[1].c2_bound();
        self.epsilon * (bx * bx + by * by).sqrt()
    }

    /// Certified `sup ||eps Dg||`: grid maximum of the spectral norm plus
    /// the Lipschitz-of-Dg margin. Invertibility needs this below
    /// `1/||A^{-1}||`.
    pub fn certified_perturbation_lip(&self, grid_n: usize) -> R {
        let nf = R::of_usize(grid_n);
        let mut worst = R::zero();
        for i in 0..grid_n {
            for j in 0..grid_n {
                let x = [R::of_usize(i) / nf, R::of_usize(j) / nf];
                let gx = self.perturbation[0].grad(x);
                let gy = self.perturbation[1].grad(x);
                let dg = [
                    [self.epsilon * gx[0], self.epsilon * gx[1]],
                    [self.epsilon * gy[0], self.epsilon * gy[1]],
                ];
                worst = worst.max(mat_norm(&dg));
            }
        }
        worst + self.dlip_bound() * R::of(std::f64::consts::SQRT_2 / 2.0) / nf
    }

    /// Lift value (no reduction mod Z^2); periodic part evaluated on frac.
    pub fn lift(&self, x: [R; 2]) -> [R; 2] {
        let a = |i: usize, j: usize| R::of(self.linear.get(i, j) as f64);
        [
            a(0, 0) * x[0] + a(0, 1) * x[1]
                + self.translation[0]
                + self.epsilon * self.perturbation[0].eval(x),
            a(1, 0) * x[0] + a(1, 1) * x[1]
                + self.translation[1]
                + self.epsilon * self.perturbation[1].eval(x),
        ]
    }

    pub fn eval(&self, x: [R; 2]) -> [R; 2] {
        let y = self.lift(x);
        [frac(y[0]), frac(y[1])]
    }

    pub fn jacobian(&self, x: [R; 2]) -> Mat2<R> {
        let gx = self.perturbation[0].grad(x);
        let gy = self.perturbation[1].grad(x);
        [
            [
                R::of(self.linear.get(0, 0) as f64) + self.epsilon * gx[0],
                R::of(self.linear.get(0, 1) as f64) + self.epsilon * gx[1],
            ],
            [
                R::of(self.linear.get(1, 0) as f64) + self.epsilon * gy[0],
                R::of(self.linear.get(1, 1) as f64) + self.epsilon * gy[1],
            ],
        ]
    }

    /// Torus inverse by damped Newton on the lift from the linear inverse
    /// guess, wrapped residuals, 30-iteration cap, 1e-13 residual.
    pub fn inverse(&self, y: [R; 2]) -> Result<[R; 2]> {
        let yf = [frac(y[0]), frac(y[1])];
        let ainv = self.linear.inverse_2x2().expect("validated unimodular");
        let start = {
            let shifted = [yf[0] - self.translation[0], yf[1] - self.translation[1]];
            let v = ainv.apply_vec(&[shifted[0], shifted[1]]);
            [frac(v[0]), frac(v[1])]
        };
        let wrap_half = |t: R| -> R {
            let f = frac(t);
            if f > R::of(0.5) {
                f - R::one()
            } else {
                f
            }
        };
        let mut x = start;
        for _ in 0..30 {
            let fx = self.eval(x);
            let r = [wrap_half(fx[0] - yf[0]), wrap_half(fx[1] - yf[1])];
            let rn = r[0].hypot(r[1]);
            if rn < R::of(1e-13) {
                return Ok([frac(x[0]), frac(x[1])]);
            }
            let jinv = mat_inv(&self.jacobian(x));
            let step = mat_vec(&jinv, r);
            x = [frac(x[0] - step[0]), frac(x[1] - step[1])];
        }
        let fx = self.eval(x);
        let r = [wrap_half(fx[0] - yf[0]), wrap_half(fx[1] - yf[1])];
        Err(Error::NoConvergence { iterations: 30, residual: r[0].hypot(r[1]).as_f64() })
    }
}

/// A family of perturbed toral maps with probabilities and a shared cone
/// pair. Construction certifies the linear parts exactly and the perturbed
/// maps on a grid.
#[derive(Clone, Debug)]
pub struct RandomToralSystem<R> {
    maps: Vec<PerturbedToralMap<R>>,
    probs: Vec<R>,
    cones: ConePair<R>,
    gamma: R,
}

pub const TORUS_CERT_GRID: usize = 64;

impl<R: Real> RandomToralSystem<R> {
    pub fn new(maps: Vec<PerturbedToralMap<R>>, probs: Vec<R>, cones: ConePair<R>) -> Result<Self> {
        crate::circle::validate_probs(&probs, maps.len())?;
        let family = MatrixFamily::new(
            maps.iter().map(|m| m.linear.clone()).collect(),
            probs.iter().map(|p| p.as_f64()).collect(),
        )?;
        let linear_cert = certify_cone_hyperbolic(&family, &cones)?;
        if !linear_cert.ok {
            return Err(Error::InvalidSystem("linear parts lack uniform cone expansion".into()));
        }
        let mut sys = RandomToralSystem { maps, probs, cones, gamma: linear_cert.gamma };
        let cert = certify_perturbed_cones(&sys, TORUS_CERT_GRID)?;
        if !cert.ok {
            return Err(Error::InvalidSystem(format!(
                "cones are preserved but lack uniform expansion (gamma = {:.4})",
                cert.gamma.as_f64()
            )));
        }
        sys.gamma = cert.gamma;
        // invertibility: certified sup ||eps Dg|| must stay below 1/||A^-1||
        for (i, map) in sys.maps.iter().enumerate() {
            let ainv = map.linear.inverse_2x2()?;
            let ainv_norm = mat_norm(&[
                [R::of(ainv.get(0, 0) as f64), R::of(ainv.get(0, 1) as f64)],
                [R::of(ainv.get(1, 0) as f64), R::of(ainv.get(1, 1) as f64)],
            ]);
            if map.certified_perturbation_lip(TORUS_CERT_GRID) * ainv_norm >= R::one() {
                return Err(Error::InvalidSystem(format!(
                    "map {i} may fail to invert: eps*Lip(g) reaches 1/||A^-1||"
                )));
            }
        }
        Ok(sys)
    }

    pub fn single(map: PerturbedToralMap<R>, cones: ConePair<R>) -> Result<Self> {
        Self::new(vec![map], vec![R::one()], cones)
    }

    pub fn maps(&self) -> &[PerturbedToralMap<R>] {
        &self.maps
    }

    pub fn probs(&self) -> &[R] {
        &self.probs
    }

    pub fn cones(&self) -> &ConePair<R> {
        &self.cones
    }

    pub fn gamma(&self) -> R {
        self.gamma
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    pub(crate) fn cat_system() -> RandomToralSystem<f64> {
        RandomToralSystem::single(
            PerturbedToralMap::linear_cat(0.0, [TrigPoly2::default(), TrigPoly2::default()])
                .unwrap(),
            ConePair::Quadrant,
        )
        .unwrap()
    }

    /// Pre-registered eps = 0.05 perturbation of the cat map:
    /// g = (sin 2 pi y, cos 2 pi x).
    pub(crate) fn perturbed_cat(eps: f64) -> PerturbedToralMap<f64> {
        PerturbedToralMap::linear_cat(
            eps,
            [
                TrigPoly2::new(vec![Term2(0, 1, 1.0, 0.0)]),
                TrigPoly2::new(vec![Term2(1, 0, 0.0, 1.0)]),
            ],
        )
        .unwrap()
    }

    #[test]
    fn lift_and_eval_agree_mod_one() {
        let m = perturbed_cat(0.05);
        let x = [0.3, 0.8];
        let lift = m.lift(x);
        let on_torus = m.eval(x);
        assert!((frac(lift[0]) - on_torus[0]).abs() < 1e-15);
        assert!((frac(lift[1]) - on_torus[1]).abs() < 1e-15);
        // periodicity of the lift: f(x + e1) = f(x) + A e1
        let lift_shift = m.lift([x[0] + 1.0, x[1]]);
        assert!((lift_shift[0] - lift[0] - 2.0).abs() < 1e-12);
        assert!((lift_shift[1] - lift[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let m = perturbed_cat(0.05);
        let x = [0.21, 0.67];
        let j = m.jacobian(x);
        let h = 1e-6;
        for (col, dir) in [([1.0, 0.0], 0), ([0.0, 1.0], 1)] {
            let xp = [x[0] + h * col[0], x[1] + h * col[1]];
            let xm = [x[0] - h * col[0], x[1] - h * col[1]];
            let (fp, fm) = (m.lift(xp), m.lift(xm));
            for row in 0..2 {
                let fd = (fp[row] - fm[row]) / (2.0 * h);
                assert!((fd - j[row][dir]).abs() < 1e-6, "row {row} dir {dir}");
            }
        }
    }

    #[test]
    fn newton_inverse_round_trips() {
        let m = perturbed_cat(0.05);
        for &x in &[[0.1, 0.2], [0.9, 0.99], [0.5, 0.0]] {
            let y = m.eval(x);
            let back = m.inverse(y).unwrap();
            let d0 = crate::util::circ_dist(back[0], x[0]);
            let d1 = crate::util::circ_dist(back[1], x[1]);
            assert!(d0 < 1e-12 && d1 < 1e-12, "({d0}, {d1})");
        }
    }

    #[test]
    fn oversized_perturbation_is_rejected_at_system_level() {
        let big = PerturbedToralMap::linear_cat(
            0.9,
            [
                TrigPoly2::new(vec![Term2(0, 1, 1.0, 0.0)]),
                TrigPoly2::new(vec![Term2(1, 0, 0.0, 1.0)]),
            ],
        )
        .unwrap();
        assert!(RandomToralSystem::single(big, crate::cocycle::ConePair::Quadrant).is_err());
    }
}

//! Expanding maps of the circle with trigonometric perturbations.
//!
//! A map is stored through its lift `F(x) = degree*x + rotation + P(x)` with
//! `P(x) = sum_k a_k sin(2 pi k x) + b_k cos(2 pi k x)`. The parameterization
//! gives exact derivatives, exact Fourier degree, and `F(x+1) = F(x) + degree`
//! by construction (trig terms are evaluated on the reduced argument).
//!
//! Expansion is never assumed: [`ExpandingCircleMap::certify_expanding`]
//! produces a rigorous lower bound on `min |F'| - 1` from a grid scan plus the
//! global Lipschitz bound `sup |F''| <= sum (2 pi k)^2 (|a_k| + |b_k|)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::util::frac;

/// One Fourier term `a*sin(2 pi k x) + b*cos(2 pi k x)`; serializes as `[k, a, b]`.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct TrigTerm<R>(pub u32, pub R, pub R);

impl<R: Real> TrigTerm<R> {
    pub fn k(&self) -> u32 {
        self.0
    }
    pub fn a(&self) -> R {
        self.1
    }
    pub fn b(&self) -> R {
        self.2
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExpandingCircleMap<R> {
    degree: i64,
    rotation: R,
    coeffs: Vec<TrigTerm<R>>,
}

/// Result of the rigorous expansion check.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct ExpansionCertificate<R> {
    /// Certified lower bound on `min |F'| - 1`; positive means expanding.
    pub margin: R,
    pub ok: bool,
}

impl<R: Real> ExpansionCertificate<R> {
    pub fn require(self) -> Result<Self> {
        if self.ok {
            Ok(self)
        } else {
            Err(Error::NotExpanding { margin: self.margin.as_f64() })
        }
    }
}

impl<R: Real> ExpandingCircleMap<R> {
    pub fn new(degree: i64, rotation: R, coeffs: Vec<TrigTerm<R>>) -> Result<Self> {
        if degree.abs() < 2 {
            return Err(Error::InvalidParameter(format!(
                "|degree| must be >= 2, got {degree}"
            )));
        }
        if rotation < R::zero() || rotation >= R::one() || !rotation.is_finite() {
            return Err(Error::InvalidParameter("rotation must lie in [0, 1)".into()));
        }
        for t in &coeffs {
            if t.k() == 0 || !t.a().is_finite() || !t.b().is_finite() {
                return Err(Error::InvalidParameter(
                    "trig terms need k >= 1 and finite coefficients".into(),
                ));
            }
        }
        Ok(ExpandingCircleMap { degree, rotation, coeffs })
    }

    pub fn affine(degree: i64, rotation: R) -> Result<Self> {
        Self::new(degree, rotation, Vec::new())
    }

    pub fn degree(&self) -> i64 {
        self.degree
    }

    pub fn rotation(&self) -> R {
        self.rotation
    }

    pub fn coeffs(&self) -> &[TrigTerm<R>] {
        &self.coeffs
    }

    fn perturbation(&self, xf: R) -> R {
        let tau = R::tau();
        let mut p = R::zero();
        for t in &self.coeffs {
            let (s, c) = (tau * R::of_usize(t.k() as usize) * xf).sin_cos();
            p = p + t.a() * s + t.b() * c;
        }
        p
    }

    /// Lift value `F(x)`. The perturbation is evaluated on `frac(x)` so that
    /// `F(x + 1) = F(x) + degree` holds exactly up to rounding in `degree*x`.
    pub fn eval_lift(&self, x: R) -> R {
        let d = R::of(self.degree as f64);
        d * x + self.rotation + self.perturbation(frac(x))
    }

    /// The circle map `F(x) mod 1`.
    pub fn eval_circle(&self, x: R) -> R {
        frac(self.eval_lift(x))
    }

    /// `F'(x) = degree + sum 2 pi k (a_k cos - b_k sin)`.
    pub fn derivative(&self, x: R) -> R {
        let tau = R::tau();
        let xf = frac(x);
        let mut d = R::of(self.degree as f64);
        for t in &self.coeffs {
            let k = R::of_usize(t.k() as usize);
            let (s, c) = (tau * k * xf).sin_cos();
            d = d + tau * k * (t.a() * c - t.b() * s);
        }
        d
    }

    /// Global bound `sup |F''| <= sum (2 pi k)^2 (|a_k| + |b_k|)`, which is a
    /// Lipschitz constant for `F'`. Exactly computable from the coefficients.
    pub fn second_derivative_bound(&self) -> R {
        let tau = R::tau();
        let mut m = R::zero();
        for t in &self.coeffs {
            let w = tau * R::of_usize(t.k() as usize);
            m = m + w * w * (t.a().abs() + t.b().abs());
        }
        m
    }

    /// `sup |P'| <= sum 2 pi k (|a_k| + |b_k|)`.
    pub fn c1_perturbation_bound(&self) -> R {
        let tau = R::tau();
        let mut m = R::zero();
        for t in &self.coeffs {
            let w = tau * R::of_usize(t.k() as usize);
            m = m + w * (t.a().abs() + t.b().abs());
        }
        m
    }

    /// Rigorous expansion certificate: `min_grid |F'| - Lip(F')/grid_n - 1`.
    /// Positive margin proves `min |F'| > 1` on all of the circle.
    pub fn certify_expanding(&self, grid_n: usize) -> Result<ExpansionCertificate<R>> {
        if grid_n < 64 {
            return Err(Error::InvalidParameter("certificate grid needs >= 64 points".into()));
        }
        let n = R::of_usize(grid_n);
        let mut min_abs = R::infinity();
        for j in 0..grid_n {
            let x = R::of_usize(j) / n;
            let v = self.derivative(x).abs();
            if v < min_abs {
                min_abs = v;
            }
        }
        let margin = min_abs - self.second_derivative_bound() / n - R::one();
        Ok(ExpansionCertificate { margin, ok: margin > R::zero() })
    }
}

/// A finite family of certified expanding maps with selection probabilities;
/// the driving measure of the random walk.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RandomCircleSystem<R> {
    maps: Vec<ExpandingCircleMap<R>>,
    probs: Vec<R>,
    margins: Vec<R>,
}

pub const CERT_GRID: usize = 4096;

pub fn validate_probs<R: Real>(probs: &[R], n: usize) -> Result<()> {
    if probs.len() != n || n == 0 {
        return Err(Error::InvalidSystem("probability vector length mismatch".into()));
    }
    let mut sum = R::zero();
    for &p in probs {
        if !(p > R::zero()) {
            return Err(Error::InvalidSystem("probabilities must be strictly positive".into()));
        }
        sum += p;
    }
    if (sum - R::one()).abs() > R::of(1e-12) {
        return Err(Error::InvalidSystem(format!("probabilities sum to {sum}, not 1")));
    }
    Ok(())
}

impl<R: Real> RandomCircleSystem<R> {
    pub fn new(maps: Vec<ExpandingCircleMap<R>>, probs: Vec<R>) -> Result<Self> {
        validate_probs(&probs, maps.len())?;
        let mut margins = Vec::with_capacity(maps.len());
        for map in &maps {
            let cert = map.certify_expanding(CERT_GRID)?.require()?;
            margins.push(cert.margin);
        }
        Ok(RandomCircleSystem { maps, probs, margins })
    }

    pub fn single(map: ExpandingCircleMap<R>) -> Result<Self> {
        Self::new(vec![map], vec![R::one()])
    }

    pub fn maps(&self) -> &[ExpandingCircleMap<R>] {
        &self.maps
    }

    pub fn probs(&self) -> &[R] {
        &self.probs
    }

    pub fn min_margin(&self) -> R {
        self.margins.iter().copied().fold(R::infinity(), |a, b| a.min(b))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::TAU;

    fn doubling() -> ExpandingCircleMap<f64> {
        ExpandingCircleMap::affine(2, 0.0).unwrap()
    }

    #[test]
    fn lift_of_affine_maps() {
        assert_eq!(doubling().eval_lift(0.25), 0.5);
        let m = ExpandingCircleMap::affine(2, 0.1f64).unwrap();
        assert!((m.eval_lift(0.0) - 0.1).abs() < 1e-15);
        // sin(2 pi * 0.5) = 0 so the trig term drops out.
        let p = ExpandingCircleMap::new(2, 0.0f64, vec![TrigTerm(1, 0.1, 0.0)]).unwrap();
        assert!((p.eval_lift(0.5) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn lift_periodicity_is_exact() {
        let m = ExpandingCircleMap::new(3, 0.37, vec![TrigTerm(1, 0.02, 0.01), TrigTerm(3, -0.004, 0.002)])
            .unwrap();
        for &x in &[-1.75f64, -0.3, 0.0, 0.31, 0.9999] {
            let diff = m.eval_lift(x + 1.0) - m.eval_lift(x);
            assert!((diff - 3.0).abs() < 1e-12, "diff {diff}");
        }
    }

    #[test]
    fn derivative_of_affine_and_perturbed() {
        assert_eq!(doubling().derivative(0.123), 2.0);
        let m = ExpandingCircleMap::new(2, 0.0, vec![TrigTerm(1, 0.1 / TAU, 0.0)]).unwrap();
        assert!((m.derivative(0.0) - 2.1).abs() < 1e-13);
    }

    #[test]
    fn derivative_integrates_to_degree() {
        // Midpoint rule is spectrally accurate for trig polynomials.
        let m = ExpandingCircleMap::new(-3, 0.2, vec![TrigTerm(2, 0.02, -0.01)]).unwrap();
        let n = 4096;
        let mut sum = 0.0;
        for j in 0..n {
            sum += m.derivative((j as f64 + 0.5) / n as f64).abs();
        }
        assert!((sum / n as f64 - 3.0).abs() < 1e-10);
    }

    #[test]
    fn certificate_accepts_doubling_with_unit_margin() {
        let cert = doubling().certify_expanding(64).unwrap();
        assert!(cert.ok);
        assert!((cert.margin - 1.0).abs() < 1e-15);
    }

    #[test]
    fn certificate_rejects_large_sine() {
        // F' = 2 + 3 cos(2 pi x) dips to -1, so |F'| reaches 0.
        let m = ExpandingCircleMap::new(2, 0.0, vec![TrigTerm(1, 3.0 / TAU, 0.0)]).unwrap();
        let err = m.certify_expanding(4096).unwrap().require().unwrap_err();
        match err {
            Error::NotExpanding { margin } => assert!(margin <= 0.0),
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn certificate_margin_for_mild_sine() {
        // F' = 3 + 0.5 cos(2 pi x), min 2.5, margin ~ 1.5.
        let m = ExpandingCircleMap::new(3, 0.0, vec![TrigTerm(1, 0.5 / TAU, 0.0)]).unwrap();
        let cert = m.certify_expanding(4096).unwrap();
        assert!(cert.ok);
        assert!(cert.margin >= 1.4);
    }

    #[test]
    fn negative_degree_is_expanding_in_absolute_value() {
        let m = ExpandingCircleMap::affine(-2, 0.25f64).unwrap();
        let cert = m.certify_expanding(64).unwrap();
        assert!(cert.ok && (cert.margin - 1.0).abs() < 1e-15);
    }

    #[test]
    fn system_rejects_bad_probabilities() {
        let maps = vec![doubling(), ExpandingCircleMap::affine(3, 0.0).unwrap()];
        assert!(RandomCircleSystem::new(maps.clone(), vec![0.5, 0.6]).is_err());
        assert!(RandomCircleSystem::new(maps, vec![0.5, 0.5]).is_ok());
    }

    #[test]
    fn json_round_trip_is_bit_exact_for_binary_fractions() {
        let m = ExpandingCircleMap::new(2, 0.375, vec![TrigTerm(2, 0.0625, -0.25)]).unwrap();
        let js = serde_json::to_string(&m).unwrap();
        assert!(js.contains("\"coeffs\":[[2,0.0625,-0.25]]"), "{js}");
        let back: ExpandingCircleMap<f64> = serde_json::from_str(&js).unwrap();
        assert_eq!(back.degree(), 2);
        assert_eq!(back.rotation(), 0.375);
        assert_eq!(back.coeffs()[0].a(), 0.0625);
        assert_eq!(back.coeffs()[0].b(), -0.25);
    }

    #[test]
    fn f32_instantiation_works() {
        let m: ExpandingCircleMap<f32> = ExpandingCircleMap::affine(2, 0.25).unwrap();
        assert!((m.eval_lift(0.5f32) - 1.25).abs() < 1e-6);
        assert!(m.certify_expanding(64).unwrap().ok);
    }
}

//! Exact and statistical linear algebra for i.i.d. products of integer
//! matrices: Lyapunov spectra, irreducibility and commutation certificates,
//! cone hyperbolicity, and the generic-automorphism test.
//!
//! Integer computations (determinants, characteristic polynomials, factor
//! searches, quadrant-cone ray images) are exact in `i64`/`i128` with
//! overflow checks; only the Monte Carlo exponent estimators and eigenvalue
//! moduli run in floating point.

mod cones;
mod genericity;
mod lines;
pub mod poly;
pub mod roots;
mod spectrum;

pub use cones::{certify_cone_hyperbolic, ConeCertificate, ConePair, MatrixConeBounds};
pub(crate) use cones::sector_form_min;
pub use genericity::{
    finest_dominated_splitting, is_generic_automorphism, GenericityReport, SplittingBlock,
};
pub use lines::{is_irreducible_family_2d, InvariantLine, IrreducibilityResult};
pub use spectrum::{lyapunov_spectrum_qr, top_lyapunov, SpectrumEstimate};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

fn checked_add(a: i128, b: i128) -> Result<i128> {
    a.checked_add(b).ok_or(Error::Overflow)
}

fn checked_mul(a: i128, b: i128) -> Result<i128> {
    a.checked_mul(b).ok_or(Error::Overflow)
}

/// Square integer matrix, dimension 2..=6, row-major entries.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntMatrix {
    dim: usize,
    entries: Vec<i64>,
}

impl IntMatrix {
    pub fn new(dim: usize, entries: Vec<i64>) -> Result<Self> {
        if !(2..=6).contains(&dim) {
            return Err(Error::DimensionUnsupported { dim, min: 2, max: 6 });
        }
        if entries.len() != dim * dim {
            return Err(Error::InvalidParameter(format!(
                "expected {} entries for dim {dim}, got {}",
                dim * dim,
                entries.len()
            )));
        }
        Ok(IntMatrix { dim, entries })
    }

    pub fn from_2x2(a: i64, b: i64, c: i64, d: i64) -> Self {
        IntMatrix { dim: 2, entries: vec![a, b, c, d] }
    }

    pub fn identity(dim: usize) -> Result<Self> {
        let mut m = IntMatrix::new(dim, vec![0; dim * dim])?;
        for i in 0..dim {
            m.entries[i * dim + i] = 1;
        }
        Ok(m)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[i64] {
        &self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> i64 {
        self.entries[i * self.dim + j]
    }

    pub fn trace(&self) -> i64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    pub fn mul(&self, other: &IntMatrix) -> Result<IntMatrix> {
        if self.dim != other.dim {
            return Err(Error::InvalidParameter("dimension mismatch in product".into()));
        }
        let d = self.dim;
        let mut out = vec![0i64; d * d];
        for i in 0..d {
            for j in 0..d {
                let mut acc: i128 = 0;
                for k in 0..d {
                    acc = checked_add(acc, checked_mul(self.get(i, k) as i128, other.get(k, j) as i128)?)?;
                }
                out[i * d + j] = i64::try_from(acc).map_err(|_| Error::Overflow)?;
            }
        }
        IntMatrix::new(d, out)
    }

    pub fn pow(&self, e: u32) -> Result<IntMatrix> {
        let mut acc = IntMatrix::identity(self.dim)?;
        for _ in 0..e {
            acc = acc.mul(self)?;
        }
        Ok(acc)
    }

    pub fn commutes_with(&self, other: &IntMatrix) -> Result<bool> {
        Ok(self.mul(other)? == other.mul(self)?)
    }

    pub fn is_positive(&self) -> bool {
        self.entries.iter().all(|&e| e > 0)
    }

    /// Exact determinant by fraction-free (Bareiss) elimination.
    pub fn det(&self) -> Result<i128> {
        let d = self.dim;
        let mut m: Vec<i128> = self.entries.iter().map(|&e| e as i128).collect();
        let mut sign = 1i128;
        let mut prev = 1i128;
        for k in 0..d - 1 {
            if m[k * d + k] == 0 {
                let Some(swap) = (k + 1..d).find(|&r| m[r * d + k] != 0) else {
                    return Ok(0);
                };
                for j in 0..d {
                    m.swap(k * d + j, swap * d + j);
                }
                sign = -sign;
            }
            for i in k + 1..d {
                for j in k + 1..d {
                    let num = checked_mul(m[i * d + j], m[k * d + k])?
                        .checked_sub(checked_mul(m[i * d + k], m[k * d + j])?)
                        .ok_or(Error::Overflow)?;
                    m[i * d + j] = num / prev;
                }
                m[i * d + k] = 0;
            }
            prev = m[k * d + k];
        }
        Ok(sign * m[(d - 1) * d + (d - 1)])
    }

    pub fn is_unimodular(&self) -> bool {
        matches!(self.det(), Ok(1) | Ok(-1))
    }

    /// Exact inverse of a unimodular 2x2 matrix.
    pub fn inverse_2x2(&self) -> Result<IntMatrix> {
        if self.dim != 2 {
            return Err(Error::DimensionUnsupported { dim: self.dim, min: 2, max: 2 });
        }
        let det = self.det()?;
        if det.abs() != 1 {
            return Err(Error::InvalidParameter("inverse requires |det| = 1".into()));
        }
        let s = det as i64;
        let (a, b, c, d) = (self.get(0, 0), self.get(0, 1), self.get(1, 0), self.get(1, 1));
        Ok(IntMatrix::from_2x2(d * s, -b * s, -c * s, a * s))
    }

    /// Exact monic characteristic polynomial by Faddeev-LeVerrier
    /// (ascending coefficients, `c[dim]` = 1).
    pub fn char_poly(&self) -> Result<poly::IntPoly> {
        let d = self.dim;
        let to_i128 = |m: &IntMatrix| -> Vec<i128> { m.entries.iter().map(|&e| e as i128).collect() };
        let a = to_i128(self);
        let tr = |m: &[i128]| -> Result<i128> {
            let mut t = 0i128;
            for i in 0..d {
                t = checked_add(t, m[i * d + i])?;
            }
            Ok(t)
        };
        let matmul = |x: &[i128], y: &[i128]| -> Result<Vec<i128>> {
            let mut out = vec![0i128; d * d];
            for i in 0..d {
                for j in 0..d {
                    let mut acc = 0i128;
                    for k in 0..d {
                        acc = checked_add(acc, checked_mul(x[i * d + k], y[k * d + j])?)?;
                    }
                    out[i * d + j] = acc;
                }
            }
            Ok(out)
        };
        // coeffs[d] x^d + ... + coeffs[0]; start from x^d.
        let mut coeffs = vec![0i128; d + 1];
        coeffs[d] = 1;
        let mut m = a.clone();
        for k in 1..=d {
            let c = -tr(&m)? / k as i128;
            coeffs[d - k] = c;
            if k == d {
                break;
            }
            let mut shifted = m.clone();
            for i in 0..d {
                shifted[i * d + i] = checked_add(shifted[i * d + i], c)?;
            }
            m = matmul(&a, &shifted)?;
        }
        Ok(poly::IntPoly::new(coeffs))
    }

    /// Apply to a real vector.
    pub fn apply_vec<R: Real>(&self, v: &[R]) -> Vec<R> {
        let d = self.dim;
        (0..d)
            .map(|i| {
                let mut acc = R::zero();
                for j in 0..d {
                    acc = acc + R::of(self.get(i, j) as f64) * v[j];
                }
                acc
            })
            .collect()
    }
}

/// Finite family of integer matrices with selection probabilities.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MatrixFamily {
    matrices: Vec<IntMatrix>,
    probs: Vec<f64>,
}

impl MatrixFamily {
    pub fn new(matrices: Vec<IntMatrix>, probs: Vec<f64>) -> Result<Self> {
        if matrices.is_empty() {
            return Err(Error::InvalidSystem("empty matrix family".into()));
        }
        let dim = matrices[0].dim();
        if matrices.iter().any(|m| m.dim() != dim) {
            return Err(Error::InvalidSystem("matrix dimensions disagree".into()));
        }
        crate::circle::validate_probs(&probs, matrices.len())?;
        Ok(MatrixFamily { matrices, probs })
    }

    pub fn single(m: IntMatrix) -> Result<Self> {
        Self::new(vec![m], vec![1.0])
    }

    pub fn matrices(&self) -> &[IntMatrix] {
        &self.matrices
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn dim(&self) -> usize {
        self.matrices[0].dim()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn cat() -> IntMatrix {
        IntMatrix::from_2x2(2, 1, 1, 1)
    }

    #[test]
    fn determinants_are_exact() {
        assert_eq!(cat().det().unwrap(), 1);
        assert_eq!(IntMatrix::from_2x2(1, 1, 1, 0).det().unwrap(), -1);
        let m = IntMatrix::new(3, vec![2, 0, 1, 0, 1, 0, 1, 0, 1]).unwrap();
        assert_eq!(m.det().unwrap(), 1);
        let singular = IntMatrix::new(3, vec![1, 2, 3, 2, 4, 6, 0, 1, 1]).unwrap();
        assert_eq!(singular.det().unwrap(), 0);
    }

    #[test]
    fn positivity_and_commutation_predicates() {
        assert!(cat().is_positive());
        assert!(!IntMatrix::from_2x2(1, 1, 0, 1).is_positive());
        let sq = cat().pow(2).unwrap();
        assert!(cat().commutes_with(&sq).unwrap());
        let other = IntMatrix::from_2x2(3, 2, 1, 1);
        assert!(!cat().commutes_with(&other).unwrap());
    }

    #[test]
    fn char_poly_of_cat_and_its_fourth_power() {
        // x^2 - 3x + 1 and x^2 - 47x + 1.
        let p = cat().char_poly().unwrap();
        assert_eq!(p.coeffs(), &[1, -3, 1]);
        let p4 = cat().pow(4).unwrap().char_poly().unwrap();
        assert_eq!(p4.coeffs(), &[1, -47, 1]);
    }

    #[test]
    fn char_poly_matches_det_and_trace_in_dim_3() {
        let m = IntMatrix::new(3, vec![0, 1, 0, 0, 0, 1, 1, 1, 0]).unwrap();
        let p = m.char_poly().unwrap();
        // companion of x^3 - x - 1
        assert_eq!(p.coeffs(), &[-1, -1, 0, 1]);
    }

    #[test]
    fn inverse_2x2_is_exact() {
        let inv = cat().inverse_2x2().unwrap();
        assert_eq!(cat().mul(&inv).unwrap(), IntMatrix::identity(2).unwrap());
        let m = IntMatrix::from_2x2(1, 1, 1, 0);
        let inv = m.inverse_2x2().unwrap();
        assert_eq!(m.mul(&inv).unwrap(), IntMatrix::identity(2).unwrap());
    }
}

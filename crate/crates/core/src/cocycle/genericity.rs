//! The generic-automorphism test and the finest dominated splitting.
//!
//! `A` in `GL(d,Z)` is generic when (1) it is hyperbolic, (2) `A` and `A^4`
//! have characteristic polynomials irreducible over `Q`, and (3) no three
//! eigenvalues share an absolute value, equal-modulus pairs being complex
//! conjugates. Conditions (1)-(2) are exact integer computations for
//! `d <= 4`; for `d = 5, 6` the unit-circle exclusion falls back to a
//! numeric guard at relative tolerance 1e-9 and the result is flagged
//! non-exact.

use serde::{Deserialize, Serialize};

use super::poly::{self, IntPoly};
use super::roots::{poly_roots, C64};
use super::IntMatrix;
use crate::error::{Error, Result};

pub const MODULUS_TOL: f64 = 1e-9;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GenericityReport {
    pub generic: bool,
    pub reasons: Vec<String>,
    /// Whether every check ran in exact arithmetic (true for dim <= 4).
    pub exact: bool,
    pub hyperbolic: bool,
    pub char_irreducible: bool,
    pub char_pow4_irreducible: bool,
    pub modulus_rule: bool,
}

fn eigenvalues(m: &IntMatrix) -> Result<Vec<C64>> {
    Ok(poly_roots(&m.char_poly()?.to_f64_coeffs()))
}

fn hyperbolic_numeric(roots: &[C64]) -> bool {
    roots.iter().all(|z| (z.abs() - 1.0).abs() > MODULUS_TOL)
}

fn hyperbolicity(m: &IntMatrix, p: &IntPoly, roots: &[C64]) -> Result<(bool, bool)> {
    if m.dim() <= 4 {
        Ok((poly::no_unit_circle_roots_exact(p)?, true))
    } else {
        let partial = poly::no_unit_circle_roots_partial(p)?;
        Ok((partial && hyperbolic_numeric(roots), false))
    }
}

fn irreducibility(p: &IntPoly) -> Result<(bool, bool)> {
    if p.degree() <= 4 {
        Ok((poly::is_irreducible(p)?, true))
    } else {
        // Linear and quadratic factor searches are still exact; a deg-3+3
        // split of a sextic would evade them, so flag the check partial.
        let has_linear = !poly::integer_roots(p)?.is_empty();
        let ok = !has_linear && !has_quadratic_factor(p)?;
        Ok((ok, false))
    }
}

fn has_quadratic_factor(p: &IntPoly) -> Result<bool> {
    // Monic x^2 + ux + v with v dividing the constant term and |u| bounded
    // by twice the Cauchy root bound.
    let c0 = p.coeffs()[0];
    if c0 == 0 {
        return Ok(true);
    }
    let bound = 2 * (1 + p.coeffs().iter().map(|c| c.abs()).max().unwrap());
    let mut divs = Vec::new();
    let mut d = 1i128;
    while d * d <= c0.abs() {
        if c0 % d == 0 {
            divs.push(d);
            divs.push(c0.abs() / d);
        }
        d += 1;
    }
    for v in divs {
        for v in [v, -v] {
            for u in -bound..=bound {
                if p.divisible_by(&IntPoly::new(vec![v, u, 1])) {
                    return Ok(true);
                }
            }
        }
    }
    Ok(false)
}

/// Sorted eigenvalue moduli grouped at relative tolerance 1e-9.
fn modulus_groups(roots: &[C64]) -> Vec<Vec<C64>> {
    let mut sorted: Vec<C64> = roots.to_vec();
    sorted.sort_by(|a, b| a.abs().total_cmp(&b.abs()));
    let mut groups: Vec<Vec<C64>> = Vec::new();
    for z in sorted {
        match groups.last_mut() {
            Some(g) if (z.abs() - g[0].abs()).abs() <= MODULUS_TOL * (1.0 + g[0].abs()) => {
                g.push(z)
            }
            _ => groups.push(vec![z]),
        }
    }
    groups
}

fn modulus_rule(roots: &[C64]) -> (bool, Vec<String>) {
    let mut reasons = Vec::new();
    for g in modulus_groups(roots) {
        if g.len() >= 3 {
            reasons.push(format!("{} eigenvalues share modulus {:.6}", g.len(), g[0].abs()));
        } else if g.len() == 2 {
            let conjugate = (g[0].re - g[1].re).abs() <= MODULUS_TOL * (1.0 + g[0].abs())
                && (g[0].im + g[1].im).abs() <= MODULUS_TOL * (1.0 + g[0].abs())
                && g[0].im.abs() > MODULUS_TOL;
            if !conjugate {
                reasons.push(format!(
                    "two non-conjugate eigenvalues share modulus {:.6}",
                    g[0].abs()
                ));
            }
        }
    }
    (reasons.is_empty(), reasons)
}

/// The full generic-automorphism test. `m` must be unimodular.
pub fn is_generic_automorphism(m: &IntMatrix) -> Result<GenericityReport> {
    if !m.is_unimodular() {
        return Err(Error::InvalidParameter(
            "generic automorphisms live in GL(d,Z): |det| must be 1".into(),
        ));
    }
    let p = m.char_poly()?;
    let roots = eigenvalues(m)?;
    let mut reasons = Vec::new();

    let (hyperbolic, hyp_exact) = hyperbolicity(m, &p, &roots)?;
    if !hyperbolic {
        reasons.push("an eigenvalue lies on the unit circle".into());
    }

    let (char_irreducible, irr_exact) = irreducibility(&p)?;
    if !char_irreducible {
        reasons.push("characteristic polynomial is reducible over Q".into());
    }

    let p4 = m.pow(4)?.char_poly()?;
    let (char_pow4_irreducible, irr4_exact) = irreducibility(&p4)?;
    if !char_pow4_irreducible {
        reasons.push("characteristic polynomial of A^4 is reducible over Q".into());
    }

    let (modulus_ok, mut modulus_reasons) = modulus_rule(&roots);
    reasons.append(&mut modulus_reasons);

    let exact = hyp_exact && irr_exact && irr4_exact;
    if !exact {
        reasons.push("dim > 4: unit-circle and factor searches are partially numeric".into());
    }

    Ok(GenericityReport {
        generic: hyperbolic && char_irreducible && char_pow4_irreducible && modulus_ok,
        reasons,
        exact,
        hyperbolic,
        char_irreducible,
        char_pow4_irreducible,
        modulus_rule: modulus_ok,
    })
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct SplittingBlock {
    pub log_modulus: f64,
    pub dim: usize,
}

/// Eigenvalues grouped by modulus, ascending in log modulus; blocks of a
/// generic matrix have dimension at most 2.
pub fn finest_dominated_splitting(m: &IntMatrix) -> Result<Vec<SplittingBlock>> {
    let p = m.char_poly()?;
    let roots = eigenvalues(m)?;
    let exact_ok = if m.dim() <= 4 {
        poly::no_unit_circle_roots_exact(&p)?
    } else {
        poly::no_unit_circle_roots_partial(&p)? && hyperbolic_numeric(&roots)
    };
    if !exact_ok || !hyperbolic_numeric(&roots) {
        return Err(Error::NotHyperbolic);
    }
    let mut blocks = Vec::new();
    for g in modulus_groups(&roots) {
        if g.len() > 2 {
            return Err(Error::BlockTooLarge { size: g.len() });
        }
        blocks.push(SplittingBlock { log_modulus: g[0].abs().ln(), dim: g.len() });
    }
    Ok(blocks)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cat() -> IntMatrix {
        IntMatrix::from_2x2(2, 1, 1, 1)
    }

    #[test]
    fn cat_map_is_generic() {
        let r = is_generic_automorphism(&cat()).unwrap();
        assert!(r.generic && r.exact, "{:?}", r.reasons);
    }

    #[test]
    fn involution_is_not_generic() {
        let r = is_generic_automorphism(&IntMatrix::from_2x2(0, 1, 1, 0)).unwrap();
        assert!(!r.generic);
        assert!(!r.hyperbolic);
        assert!(!r.char_irreducible); // (x-1)(x+1)
    }

    #[test]
    fn parabolic_is_not_generic() {
        let r = is_generic_automorphism(&IntMatrix::from_2x2(1, 1, 0, 1)).unwrap();
        assert!(!r.generic);
        assert!(!r.hyperbolic);
        assert!(!r.char_irreducible); // (x-1)^2
    }

    #[test]
    fn salem_like_quartic_companion_is_caught_exactly() {
        // companion of x^4 - x^3 - x^2 - x + 1: irreducible but two
        // eigenvalues on the unit circle. The cyclotomic list alone would
        // miss it; the reciprocal-quartic test must not.
        let m = IntMatrix::new(4, vec![0, 0, 0, -1, 1, 0, 0, 1, 0, 1, 0, 1, 0, 0, 1, 1]).unwrap();
        assert_eq!(m.char_poly().unwrap().coeffs(), &[1, -1, -1, -1, 1]);
        let r = is_generic_automorphism(&m).unwrap();
        assert!(!r.hyperbolic && !r.generic && r.exact);
    }

    #[test]
    fn splitting_of_cat_map() {
        let blocks = finest_dominated_splitting(&cat()).unwrap();
        assert_eq!(blocks.len(), 2);
        let top = 0.9624236501192069f64;
        assert!((blocks[0].log_modulus + top).abs() < 1e-9);
        assert!((blocks[1].log_modulus - top).abs() < 1e-9);
        assert_eq!((blocks[0].dim, blocks[1].dim), (1, 1));
    }

    #[test]
    fn splitting_rejects_non_hyperbolic() {
        assert!(matches!(
            finest_dominated_splitting(&IntMatrix::from_2x2(1, 1, 0, 1)),
            Err(Error::NotHyperbolic)
        ));
    }

    #[test]
    fn quartic_companion_with_complex_pair_has_a_dim2_block() {
        // companion of x^4 - 2x^3 + x - 1: two real roots and one complex
        // conjugate pair off the unit circle.
        let m = IntMatrix::new(4, vec![0, 0, 0, 1, 1, 0, 0, -1, 0, 1, 0, 0, 0, 0, 1, 2]).unwrap();
        assert_eq!(m.char_poly().unwrap().coeffs(), &[-1, 1, 0, -2, 1]);
        let blocks = finest_dominated_splitting(&m).unwrap();
        assert_eq!(blocks.iter().map(|b| b.dim).sum::<usize>(), 4);
        assert!(blocks.iter().any(|b| b.dim == 2));
        let r = is_generic_automorphism(&m).unwrap();
        assert!(r.generic, "{:?}", r.reasons);
    }
}

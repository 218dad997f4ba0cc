//! Exact monic integer polynomials: division, complete factorization up to
//! degree 4, irreducibility over Q, and unit-circle root exclusion.
//!
//! Rational roots of a monic integer polynomial are integers dividing the
//! constant term; quadratic factors of a monic quartic have constant terms
//! that split the constant term, so an exhaustive divisor-pair search is
//! exact. Unit-circle roots of an irreducible integer factor can only occur
//! for `x +- 1`, for quadratics `x^2 + bx + 1` with `|b| < 2`, or for
//! self-reciprocal quartics, which reduce to a real quadratic in
//! `z = x + 1/x` with a root in `[-2, 2]`.

use crate::error::{Error, Result};

fn cadd(a: i128, b: i128) -> Result<i128> {
    a.checked_add(b).ok_or(Error::Overflow)
}

fn cmul(a: i128, b: i128) -> Result<i128> {
    a.checked_mul(b).ok_or(Error::Overflow)
}

/// Integer polynomial with ascending coefficients (`c[0]` constant).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntPoly {
    c: Vec<i128>,
}

impl IntPoly {
    pub fn new(mut c: Vec<i128>) -> Self {
        while c.len() > 1 && *c.last().unwrap() == 0 {
            c.pop();
        }
        IntPoly { c }
    }

    pub fn coeffs(&self) -> &[i128] {
        &self.c
    }

    pub fn degree(&self) -> usize {
        self.c.len() - 1
    }

    pub fn is_monic(&self) -> bool {
        *self.c.last().unwrap() == 1
    }

    pub fn eval(&self, x: i128) -> Result<i128> {
        let mut acc = 0i128;
        for &c in self.c.iter().rev() {
            acc = cadd(cmul(acc, x)?, c)?;
        }
        Ok(acc)
    }

    pub fn to_f64_coeffs(&self) -> Vec<f64> {
        self.c.iter().map(|&c| c as f64).collect()
    }

    /// Exact division by a monic divisor; `None` if it does not divide.
    pub fn div_exact(&self, divisor: &IntPoly) -> Option<IntPoly> {
        if !divisor.is_monic() || divisor.degree() > self.degree() {
            return None;
        }
        let mut rem = self.c.clone();
        let n = self.degree();
        let m = divisor.degree();
        let mut quot = vec![0i128; n - m + 1];
        for k in (0..=n - m).rev() {
            let q = rem[k + m];
            quot[k] = q;
            if q != 0 {
                for (j, &dc) in divisor.c.iter().enumerate() {
                    rem[k + j] = rem[k + j].checked_sub(q.checked_mul(dc)?)?;
                }
            }
        }
        if rem.iter().all(|&r| r == 0) {
            Some(IntPoly::new(quot))
        } else {
            None
        }
    }

    /// Is `self` divisible by `divisor`?
    pub fn divisible_by(&self, divisor: &IntPoly) -> bool {
        self.div_exact(divisor).is_some()
    }
}

pub fn isqrt(n: i128) -> Option<i128> {
    if n < 0 {
        return None;
    }
    let mut r = (n as f64).sqrt() as i128;
    while r * r > n {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= n {
        r += 1;
    }
    if r * r == n {
        Some(r)
    } else {
        None
    }
}

fn divisors(n: i128) -> Vec<i128> {
    let n = n.abs();
    let mut out = Vec::new();
    let mut d = 1i128;
    while d * d <= n {
        if n % d == 0 {
            out.push(d);
            if d != n / d {
                out.push(n / d);
            }
        }
        d += 1;
    }
    out.sort_unstable();
    out
}

/// Integer roots of a monic polynomial (each listed once).
pub fn integer_roots(p: &IntPoly) -> Result<Vec<i128>> {
    let c0 = p.coeffs()[0];
    let mut roots = Vec::new();
    if c0 == 0 {
        roots.push(0);
        let reduced = p.div_exact(&IntPoly::new(vec![0, 1])).expect("x divides");
        for r in integer_roots(&reduced)? {
            if r != 0 && !roots.contains(&r) {
                roots.push(r);
            }
        }
        return Ok(roots);
    }
    for d in divisors(c0) {
        for cand in [d, -d] {
            if !roots.contains(&cand) && p.eval(cand)? == 0 {
                roots.push(cand);
            }
        }
    }
    roots.sort_unstable();
    Ok(roots)
}

/// Monic quadratic factors `x^2 + ux + v` of a monic quartic: `v` must pair
/// with a cofactor constant `v'` such that `v v' = c0`, and `u, u'` are
/// integer roots of `t^2 - c3 t + (c2 - v - v')`.
fn quartic_quadratic_factor(p: &IntPoly) -> Result<Option<IntPoly>> {
    debug_assert_eq!(p.degree(), 4);
    let c = p.coeffs();
    let (c0, c1, c2, c3) = (c[0], c[1], c[2], c[3]);
    debug_assert_ne!(c0, 0, "linear factors are stripped before the quadratic search");
    for v in divisors(c0) {
        for v in [v, -v] {
            if c0 % v != 0 {
                continue;
            }
            let vp = c0 / v;
            let s = c3; // u + u'
            let prod = c2 - v - vp; // u u'
            let disc = cmul(s, s)?.checked_sub(cmul(4, prod)?).ok_or(Error::Overflow)?;
            let Some(root) = isqrt(disc) else { continue };
            for u in [(s + root) / 2, (s - root) / 2] {
                let up = s - u;
                // parity guard: u must be a genuine integer root of t^2 - st + prod
                if cmul(u, up)? != prod {
                    continue;
                }
                if cadd(cmul(u, vp)?, cmul(up, v)?)? == c1 {
                    let cand = IntPoly::new(vec![v, u, 1]);
                    if p.divisible_by(&cand) {
                        return Ok(Some(cand));
                    }
                }
            }
        }
    }
    Ok(None)
}

/// Complete factorization into monic irreducible integer polynomials,
/// exact for degree <= 4.
pub fn factor_monic(p: &IntPoly) -> Result<Vec<IntPoly>> {
    assert!(p.is_monic(), "factor_monic needs a monic polynomial");
    if p.degree() > 4 {
        return Err(Error::DimensionUnsupported { dim: p.degree(), min: 1, max: 4 });
    }
    if p.degree() <= 1 {
        return Ok(vec![p.clone()]);
    }
    // Strip linear factors first.
    for r in integer_roots(p)? {
        let lin = IntPoly::new(vec![-r, 1]);
        if let Some(q) = p.div_exact(&lin) {
            let mut fs = vec![lin];
            fs.extend(factor_monic(&q)?);
            return Ok(fs);
        }
    }
    match p.degree() {
        2 | 3 => Ok(vec![p.clone()]), // no rational root => irreducible (deg <= 3)
        4 => {
            if let Some(quad) = quartic_quadratic_factor(p)? {
                let rest = p.div_exact(&quad).expect("verified divisor");
                let mut fs = vec![quad];
                fs.extend(factor_monic(&rest)?);
                Ok(fs)
            } else {
                Ok(vec![p.clone()])
            }
        }
        _ => unreachable!(),
    }
}

/// Irreducibility over Q of a monic integer polynomial, exact for deg <= 4.
pub fn is_irreducible(p: &IntPoly) -> Result<bool> {
    if p.degree() == 0 {
        return Ok(false);
    }
    Ok(factor_monic(p)?.len() == 1)
}

/// Cyclotomic polynomials of degree <= 6, ascending coefficients.
pub fn cyclotomics_deg_le_6() -> Vec<IntPoly> {
    let polys: [&[i128]; 13] = [
        &[-1, 1],                  // phi_1
        &[1, 1],                   // phi_2
        &[1, 1, 1],                // phi_3
        &[1, 0, 1],                // phi_4
        &[1, 1, 1, 1, 1],          // phi_5
        &[1, -1, 1],               // phi_6
        &[1, 1, 1, 1, 1, 1, 1],    // phi_7
        &[1, 0, 0, 0, 1],          // phi_8
        &[1, 0, 0, 1, 0, 0, 1],    // phi_9
        &[1, -1, 1, -1, 1],        // phi_10
        &[1, 0, -1, 0, 1],         // phi_12
        &[1, -1, 1, -1, 1, -1, 1], // phi_14
        &[1, 0, 0, -1, 0, 0, 1],   // phi_18
    ];
    polys.iter().map(|c| IntPoly::new(c.to_vec())).collect()
}

/// Does the monic quadratic `z^2 + az + b` have a real root in `[-2, 2]`?
/// Exact integer test: sign change over the interval, or nonnegative
/// discriminant with the vertex inside.
fn quadratic_root_in_sym2(a: i128, b: i128) -> Result<bool> {
    let q = |z: i128| -> Result<i128> { cadd(cadd(cmul(z, z)?, cmul(a, z)?)?, b) };
    let (qlo, qhi) = (q(-2)?, q(2)?);
    if qlo == 0 || qhi == 0 || (qlo < 0) != (qhi < 0) {
        return Ok(true);
    }
    let disc = cmul(a, a)?.checked_sub(cmul(4, b)?).ok_or(Error::Overflow)?;
    // vertex at z = -a/2 inside [-2,2] <=> -4 <= -a <= 4
    Ok(disc >= 0 && (-4..=4).contains(&-a))
}

/// Does an irreducible monic integer polynomial have a root on the unit
/// circle? Exact for degree <= 4.
fn irreducible_has_unit_circle_root(p: &IntPoly) -> Result<bool> {
    let c = p.coeffs();
    match p.degree() {
        1 => Ok(c[0].abs() == 1), // root -c0
        2 => Ok(c[0] == 1 && c[1].abs() < 2), // conjugate pair on circle
        3 => Ok(false), // would force a rational or reciprocal-quadratic factor
        4 => {
            // Only self-reciprocal quartics can carry circle roots.
            if c[0] == 1 && c[1] == c[3] {
                quadratic_root_in_sym2(c[3], c[2] - 2)
            } else {
                Ok(false)
            }
        }
        _ => Err(Error::DimensionUnsupported { dim: p.degree(), min: 1, max: 4 }),
    }
}

/// Exact unit-circle exclusion for monic polynomials of degree <= 4:
/// true iff no complex root has modulus exactly 1.
pub fn no_unit_circle_roots_exact(p: &IntPoly) -> Result<bool> {
    for f in factor_monic(p)? {
        if irreducible_has_unit_circle_root(&f)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Partial exclusion for degree 5 and 6: rational roots and cyclotomic
/// divisors only. A clean pass here is necessary but not sufficient;
/// callers pair it with a numeric guard.
pub fn no_unit_circle_roots_partial(p: &IntPoly) -> Result<bool> {
    for r in integer_roots(p)? {
        if r.abs() == 1 {
            return Ok(false);
        }
    }
    for phi in cyclotomics_deg_le_6() {
        if phi.degree() <= p.degree() && p.divisible_by(&phi) {
            return Ok(false);
        }
    }
    Ok(true)
}

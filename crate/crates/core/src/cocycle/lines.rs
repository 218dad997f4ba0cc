//! Common invariant lines of 2x2 integer families, in exact arithmetic.
//!
//! The invariant lines of `M = [[a,b],[c,d]]` are the projective zeros of the
//! binary form `Q_M(x, y) = c x^2 + (d - a) x y - b y^2`. A line is either
//! rational (integer direction) or a quadratic irrational, represented by its
//! form and a choice of square root; membership under another matrix reduces
//! to exact evaluation in `Z[sqrt(D)]`.

use serde::{Deserialize, Serialize};

use super::poly::isqrt;
use super::{IntMatrix, MatrixFamily};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum InvariantLine {
    /// Direction `(p, q)` with integer entries, primitive.
    Rational { p: i64, q: i64 },
    /// Slope `x/y = (-B + s*sqrt(D)) / (2A)` for the form `A x^2 + B xy + C y^2`,
    /// `D = B^2 - 4AC` not a perfect square, `s = +-1`.
    QuadraticIrrational { form: [i64; 3], positive_sqrt: bool },
}

impl InvariantLine {
    /// Float direction for display, unit normalized.
    pub fn direction(&self) -> [f64; 2] {
        let (x, y) = match self {
            InvariantLine::Rational { p, q } => (*p as f64, *q as f64),
            InvariantLine::QuadraticIrrational { form, positive_sqrt } => {
                let [a, b, _c] = form.map(|v| v as f64);
                let d = (form[1] as f64).powi(2) - 4.0 * form[0] as f64 * form[2] as f64;
                let s = if *positive_sqrt { 1.0 } else { -1.0 };
                ((-b + s * d.sqrt()) / (2.0 * a), 1.0)
            }
        };
        let n = x.hypot(y);
        [x / n, y / n]
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct IrreducibilityResult {
    pub irreducible: bool,
    pub witness: Option<InvariantLine>,
}

fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

fn gcd_i128(a: i128, b: i128) -> i128 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// The invariant-line form of a 2x2 matrix: `c x^2 + (d-a) xy - b y^2`.
fn line_form(m: &IntMatrix) -> [i64; 3] {
    let (a, b, c, d) = (m.get(0, 0), m.get(0, 1), m.get(1, 0), m.get(1, 1));
    let mut f = [c, d - a, -b];
    let g = gcd(gcd(f[0], f[1]), f[2]);
    if g > 1 {
        f = f.map(|v| v / g);
    }
    f
}

/// Exact hyperbolicity for a 2x2 integer matrix: real, distinct, off the
/// unit circle. `disc = tr^2 - 4 det` must be positive and `+-1` must not be
/// eigenvalues.
fn require_hyperbolic_2x2(m: &IntMatrix, index: usize) -> Result<()> {
    let t = m.trace() as i128;
    let det = m.det()?;
    let disc = t * t - 4 * det;
    if disc <= 0 {
        return Err(Error::UnsupportedFamily(format!(
            "matrix {index} has non-real or parabolic spectrum (|trace| too small)"
        )));
    }
    // eigenvalue 1: 1 - t + det = 0; eigenvalue -1: 1 + t + det = 0
    if 1 - t + det == 0 || 1 + t + det == 0 {
        return Err(Error::UnsupportedFamily(format!(
            "matrix {index} has a unimodular eigenvalue"
        )));
    }
    Ok(())
}

/// The (at most two) invariant lines of a hyperbolic 2x2 integer matrix.
/// The positive-sqrt root comes first, so for a positive matrix the leading
/// entry is the expanding (Perron) line.
fn invariant_lines(m: &IntMatrix) -> Vec<InvariantLine> {
    let [a, b, c] = line_form(m);
    if a == 0 {
        // y * (b x + c y) = 0: the line y = 0 plus (if b != 0) (-c : b).
        let mut lines = vec![InvariantLine::Rational { p: 1, q: 0 }];
        if b != 0 {
            let g = gcd(b, c).max(1);
            lines.push(InvariantLine::Rational { p: -c / g, q: b / g });
        }
        return lines;
    }
    let d = (b as i128) * (b as i128) - 4 * (a as i128) * (c as i128);
    debug_assert!(d > 0, "hyperbolic matrices have two distinct eigenlines");
    if let Some(s) = isqrt(d) {
        // rational slopes (-b +- s) / (2a)
        let mut lines = Vec::new();
        for sq in [s, -s] {
            let num = -(b as i128) + sq;
            let den = 2 * a as i128;
            let g = gcd_i128(num, den).max(1);
            lines.push(InvariantLine::Rational { p: (num / g) as i64, q: (den / g) as i64 });
        }
        lines.dedup();
        lines
    } else {
        vec![
            InvariantLine::QuadraticIrrational { form: [a, b, c], positive_sqrt: true },
            InvariantLine::QuadraticIrrational { form: [a, b, c], positive_sqrt: false },
        ]
    }
}

/// Is the line invariant under `m`? Exact in integers or in `Z[sqrt(D)]`.
fn line_invariant_under(line: &InvariantLine, m: &IntMatrix) -> bool {
    match line {
        InvariantLine::Rational { p, q } => {
            let (a, b, c, d) = (m.get(0, 0), m.get(0, 1), m.get(1, 0), m.get(1, 1));
            let (ix, iy) = (
                a as i128 * *p as i128 + b as i128 * *q as i128,
                c as i128 * *p as i128 + d as i128 * *q as i128,
            );
            // cross product of (p, q) with its image
            *p as i128 * iy - *q as i128 * ix == 0
        }
        InvariantLine::QuadraticIrrational { form, positive_sqrt } => {
            let [a1, b1, _c1] = form.map(|v| v as i128);
            let d = b1 * b1 - 4 * a1 * form[2] as i128;
            let s = if *positive_sqrt { 1 } else { -1 };
            let [aj, bj, cj] = line_form(m).map(|v| v as i128);
            // 4 A^2 Q_j(tau, 1) = P + Q sqrt(D) with
            // P = A_j (B^2 + D) - 2 A B B_j + 4 A^2 C_j, Q = 2 s (A B_j - A_j B)
            let p = aj * (b1 * b1 + d) - 2 * a1 * b1 * bj + 4 * a1 * a1 * cj;
            let q = 2 * s * (a1 * bj - aj * b1);
            p == 0 && q == 0
        }
    }
}

/// Does the family share an invariant line? Requires every member to be
/// hyperbolic (exact check); returns the common line as a witness when the
/// family is reducible.
pub fn is_irreducible_family_2d(family: &MatrixFamily) -> Result<IrreducibilityResult> {
    if family.dim() != 2 {
        return Err(Error::DimensionUnsupported { dim: family.dim(), min: 2, max: 2 });
    }
    for (i, m) in family.matrices().iter().enumerate() {
        require_hyperbolic_2x2(m, i)?;
    }
    let first = &family.matrices()[0];
    for line in invariant_lines(first) {
        if family.matrices().iter().skip(1).all(|m| line_invariant_under(&line, m)) {
            return Ok(IrreducibilityResult { irreducible: false, witness: Some(line) });
        }
    }
    Ok(IrreducibilityResult { irreducible: true, witness: None })
}

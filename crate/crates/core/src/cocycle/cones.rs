//! Cone hyperbolicity certificates for 2x2 integer families.
//!
//! For quadrant cones the boundary rays are coordinate axes, so strict
//! invariance is a sign pattern on integer matrix columns; the minimal
//! expansion over a cone is the sector minimum of the quadratic form
//! `v^T M^T M v`, attained at a boundary ray or at the interior eigenvector.
//! Both pieces are closed-form.

use serde::{Deserialize, Serialize};

use super::{IntMatrix, MatrixFamily};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Stable/unstable cone pair on the plane. `Quadrant` is the exact pair
/// `C^u = {xy >= 0}`, `C^s = {xy <= 0}`; `Axial` is a numeric pair
/// `C_kappa(axis) = {|w_perp| <= kappa |w_axis|}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub enum ConePair<R> {
    Quadrant,
    Axial { unstable_axis: [R; 2], stable_axis: [R; 2], kappa: R },
}

impl<R: Real> ConePair<R> {
    pub fn validate(&self) -> Result<()> {
        match self {
            ConePair::Quadrant => Ok(()),
            ConePair::Axial { unstable_axis, stable_axis, kappa } => {
                if !(*kappa > R::zero() && *kappa < R::one()) {
                    return Err(Error::InvalidParameter("cone aperture must lie in (0,1)".into()));
                }
                for ax in [unstable_axis, stable_axis] {
                    if ax[0].hypot(ax[1]) <= R::zero() {
                        return Err(Error::InvalidParameter("cone axis must be nonzero".into()));
                    }
                }
                Ok(())
            }
        }
    }

    /// Half-cone sector `[lo, hi]` of line angles (radians, width < pi).
    pub(crate) fn unstable_sector(&self) -> (R, R) {
        match self {
            ConePair::Quadrant => (R::zero(), R::of(std::f64::consts::FRAC_PI_2)),
            ConePair::Axial { unstable_axis, kappa, .. } => {
                let th = unstable_axis[1].atan2(unstable_axis[0]);
                let half = kappa.atan();
                (th - half, th + half)
            }
        }
    }

    pub(crate) fn stable_sector(&self) -> (R, R) {
        match self {
            ConePair::Quadrant => {
                let p = R::of(std::f64::consts::FRAC_PI_2);
                (p, p + p)
            }
            ConePair::Axial { stable_axis, kappa, .. } => {
                let th = stable_axis[1].atan2(stable_axis[0]);
                let half = kappa.atan();
                (th - half, th + half)
            }
        }
    }
}

/// Minimum of `v^T G v` over unit vectors in the closed angular sector
/// `[lo, hi]` (width <= pi/2), with `G` symmetric positive semidefinite.
/// Candidates: the two boundary rays and the interior critical direction.
pub(crate) fn sector_form_min<R: Real>(g: [[R; 2]; 2], lo: R, hi: R) -> R {
    let eval = |theta: R| {
        let (s, c) = theta.sin_cos();
        g[0][0] * c * c + (g[0][1] + g[1][0]) * s * c + g[1][1] * s * s
    };
    let mut m = eval(lo).min(eval(hi));
    // critical angles of a quadratic form: tan(2 theta) = 2 G12 / (G11 - G22)
    let two = R::of(2.0);
    let base = (two * g[0][1]).atan2(g[0][0] - g[1][1]) / two;
    let pi = R::of(std::f64::consts::PI);
    for k in -2..=2 {
        let theta = base + R::of(k as f64) * pi / two;
        if theta > lo && theta < hi {
            m = m.min(eval(theta));
        }
    }
    m
}

/// Gram matrix `M^T M` in exact integers lifted to the scalar type.
fn gram<R: Real>(m: &IntMatrix) -> [[R; 2]; 2] {
    let (a, b, c, d) = (m.get(0, 0) as i128, m.get(0, 1) as i128, m.get(1, 0) as i128, m.get(1, 1) as i128);
    let g = [[a * a + c * c, a * b + c * d], [a * b + c * d, b * b + d * d]];
    [
        [R::of(g[0][0] as f64), R::of(g[0][1] as f64)],
        [R::of(g[1][0] as f64), R::of(g[1][1] as f64)],
    ]
}

/// Strict quadrant inclusion of the images of two boundary rays: both must
/// land strictly inside the same open quadrant of the target cone.
fn quadrant_strictly_inside(w1: [i64; 2], w2: [i64; 2], positive_quadrants: bool) -> bool {
    let inside = |w: [i64; 2]| -> Option<bool> {
        if w[0] == 0 || w[1] == 0 {
            return None; // on the cone boundary
        }
        let same_sign = (w[0] > 0) == (w[1] > 0);
        if same_sign == positive_quadrants {
            Some(w[0] > 0)
        } else {
            None
        }
    };
    matches!((inside(w1), inside(w2)), (Some(a), Some(b)) if a == b)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MatrixConeBounds<R> {
    /// min ||M v|| over unit v in the unstable cone
    pub unstable_expansion: R,
    /// min ||M^{-1} v|| over unit v in the stable cone
    pub stable_expansion: R,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConeCertificate<R> {
    pub ok: bool,
    /// log of the least certified expansion across the family and both cones
    pub gamma: R,
    pub per_matrix: Vec<MatrixConeBounds<R>>,
}

/// Certify that every family member maps `C^u` strictly inside itself and
/// `C^s` strictly inside itself under the inverse, with uniform expansion
/// `gamma`. Exact ray arithmetic for quadrant cones.
pub fn certify_cone_hyperbolic<R: Real>(
    family: &MatrixFamily,
    cones: &ConePair<R>,
) -> Result<ConeCertificate<R>> {
    if family.dim() != 2 {
        return Err(Error::DimensionUnsupported { dim: family.dim(), min: 2, max: 2 });
    }
    cones.validate()?;
    let mut gamma = R::infinity();
    let mut per_matrix = Vec::with_capacity(family.matrices().len());
    for (idx, m) in family.matrices().iter().enumerate() {
        if !m.is_unimodular() {
            return Err(Error::UnsupportedFamily(format!(
                "matrix {idx} is not unimodular; cone certificates live on GL(2,Z)"
            )));
        }
        let minv = m.inverse_2x2()?;
        match cones {
            ConePair::Quadrant => {
                let w1 = [m.get(0, 0), m.get(1, 0)];
                let w2 = [m.get(0, 1), m.get(1, 1)];
                if !quadrant_strictly_inside(w1, w2, true) {
                    let ray = if quadrant_ray_ok(w1, true) { [0, 1] } else { [1, 0] };
                    return Err(Error::ConeNotPreserved { matrix_index: idx, ray });
                }
                // stable cone Q2 u Q4 spanned by (-e1, e2) under M^{-1}
                let v1 = [-minv.get(0, 0), -minv.get(1, 0)];
                let v2 = [minv.get(0, 1), minv.get(1, 1)];
                if !quadrant_strictly_inside(v1, v2, false) {
                    let ray = if quadrant_ray_ok(v1, false) { [0, 1] } else { [-1, 0] };
                    return Err(Error::ConeNotPreserved { matrix_index: idx, ray });
                }
            }
            ConePair::Axial { .. } => {
                axial_inclusion_check::<R>(m, &minv, cones, idx)?;
            }
        }
        let (ulo, uhi) = cones.unstable_sector();
        let (slo, shi) = cones.stable_sector();
        let mu = sector_form_min(gram::<R>(m), ulo, uhi).sqrt();
        let ms = sector_form_min(gram::<R>(&minv), slo, shi).sqrt();
        gamma = gamma.min(mu.ln()).min(ms.ln());
        per_matrix.push(MatrixConeBounds { unstable_expansion: mu, stable_expansion: ms });
    }
    Ok(ConeCertificate { ok: gamma > R::zero(), gamma, per_matrix })
}

fn quadrant_ray_ok(w: [i64; 2], positive_quadrants: bool) -> bool {
    w[0] != 0 && w[1] != 0 && (((w[0] > 0) == (w[1] > 0)) == positive_quadrants)
}

/// Numeric strict-inclusion check for axial cones: image rays of the cone
/// boundary must land strictly inside the open sector.
fn axial_inclusion_check<R: Real>(
    m: &IntMatrix,
    minv: &IntMatrix,
    cones: &ConePair<R>,
    idx: usize,
) -> Result<()> {
    let pi = R::of(std::f64::consts::PI);
    let line_angle = |v: [R; 2]| -> R {
        let mut th = v[1].atan2(v[0]);
        while th < R::zero() {
            th = th + pi;
        }
        while th >= pi {
            th = th - pi;
        }
        th
    };
    let inside_open = |th: R, lo: R, hi: R| -> bool {
        // compare as lines mod pi
        for k in -1..=1 {
            let t = th + R::of(k as f64) * pi;
            if t > lo && t < hi {
                return true;
            }
        }
        false
    };
    let check = |mat: &IntMatrix, lo: R, hi: R, ray_label: [i64; 2]| -> Result<()> {
        for b in [lo, hi] {
            let (s, c) = b.sin_cos();
            let w = mat.apply_vec(&[c, s]);
            if !inside_open(line_angle([w[0], w[1]]), lo, hi) {
                return Err(Error::ConeNotPreserved { matrix_index: idx, ray: ray_label });
            }
        }
        Ok(())
    };
    let (ulo, uhi) = cones.unstable_sector();
    check(m, ulo, uhi, [1, 0])?;
    let (slo, shi) = cones.stable_sector();
    check(minv, slo, shi, [0, 1])?;
    Ok(())
}

//! The linearizing conjugacy `H . f = A . H` for a single perturbed map,
//! solved as a fixed point along the eigen-splitting of `A`.
//!
//! Writing `H = id + u`, the functional equation becomes
//! `A u(x) - u(f(x)) = f(x) - A x =: phi(x)`. In eigencoordinates the
//! unstable component contracts forward (`u+ <- (u+ . f + phi+)/lambda_u`)
//! and the stable component contracts backward through `f^{-1}`. The grid
//! solution is verified against the functional equation, optionally on a
//! finer verification grid.

use serde::{Deserialize, Serialize};

use super::{mat_vec, Mat2, PerturbedToralMap};
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::util::{circ_dist, circular_mean, frac};

/// `H = id + u` sampled on an `n x n` torus grid, bilinear in between.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConjugacyGrid<R> {
    n: usize,
    disp: Vec<[R; 2]>,
    /// structural-stability radius recorded at solve time; `sup ||u||` is
    /// guaranteed not to exceed it.
    radius: R,
}

impl<R: Real> ConjugacyGrid<R> {
    pub fn identity(n: usize) -> Self {
        ConjugacyGrid { n, disp: vec![[R::zero(); 2]; n * n], radius: R::zero() }
    }

    pub fn from_displacements(n: usize, disp: Vec<[R; 2]>, radius: R) -> Result<Self> {
        if disp.len() != n * n || n < 2 {
            return Err(Error::InvalidParameter("displacement grid size mismatch".into()));
        }
        Ok(ConjugacyGrid { n, disp, radius })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn radius(&self) -> R {
        self.radius
    }

    pub fn displacements(&self) -> &[[R; 2]] {
        &self.disp
    }

    pub fn node(&self, i: usize, j: usize) -> [R; 2] {
        self.disp[i * self.n + j]
    }

    /// Bilinear, Z^2-periodic displacement.
    pub fn displacement(&self, x: [R; 2]) -> [R; 2] {
        let n = self.n;
        let nf = R::of_usize(n);
        let px = frac(x[0]) * nf;
        let py = frac(x[1]) * nf;
        let i0 = (px.floor().as_f64() as usize).min(n - 1);
        let j0 = (py.floor().as_f64() as usize).min(n - 1);
        let tx = px - R::of_usize(i0);
        let ty = py - R::of_usize(j0);
        let i1 = (i0 + 1) % n;
        let j1 = (j0 + 1) % n;
        let one = R::one();
        let mut out = [R::zero(); 2];
        for c in 0..2 {
            out[c] = (one - tx) * (one - ty) * self.disp[i0 * n + j0][c]
                + tx * (one - ty) * self.disp[i1 * n + j0][c]
                + (one - tx) * ty * self.disp[i0 * n + j1][c]
                + tx * ty * self.disp[i1 * n + j1][c];
        }
        out
    }

    /// `H(x) = x + u(x)` on the torus.
    pub fn eval(&self, x: [R; 2]) -> [R; 2] {
        let u = self.displacement(x);
        [frac(x[0] + u[0]), frac(x[1] + u[1])]
    }

    pub fn sup_displacement(&self) -> R {
        self.disp
            .iter()
            .map(|d| d[0].hypot(d[1]))
            .fold(R::zero(), |a, b| a.max(b))
    }

    /// Inverse by the contraction `y -> x - u(y)`; needs `sup ||Du|| < 1`,
    /// which holds inside the recorded radius.
    pub fn inverse(&self, x: [R; 2]) -> [R; 2] {
        let mut y = x;
        for _ in 0..200 {
            let u = self.displacement(y);
            let next = [frac(x[0] - u[0]), frac(x[1] - u[1])];
            let d = circ_dist(next[0], y[0]).max(circ_dist(next[1], y[1]));
            y = next;
            if d < R::of(1e-14) {
                break;
            }
        }
        y
    }
}

/// Real eigen data of an exactly hyperbolic 2x2 integer matrix.
pub(crate) struct EigenSplit<R> {
    pub lambda_u: R,
    pub lambda_s: R,
    /// columns e_u, e_s
    pub basis: Mat2<R>,
    pub basis_inv: Mat2<R>,
}

pub(crate) fn eigen_split<R: Real>(a: &crate::cocycle::IntMatrix) -> EigenSplit<R> {
    let (m00, m01, m10, m11) = (
        a.get(0, 0) as f64,
        a.get(0, 1) as f64,
        a.get(1, 0) as f64,
        a.get(1, 1) as f64,
    );
    let tr = m00 + m11;
    let det = m00 * m11 - m01 * m10;
    let disc = (tr * tr - 4.0 * det).sqrt();
    let l1 = (tr + disc) / 2.0;
    let l2 = (tr - disc) / 2.0;
    let (lu, ls) = if l1.abs() >= l2.abs() { (l1, l2) } else { (l2, l1) };
    let evec = |l: f64| -> [f64; 2] {
        // rows of (A - l I) are orthogonal to the eigenvector
        let v = if m01.abs() > 1e-12 { [m01, l - m00] } else { [l - m11, m10] };
        let n = v[0].hypot(v[1]);
        [v[0] / n, v[1] / n]
    };
    let eu = evec(lu);
    let es = evec(ls);
    let basis = [[R::of(eu[0]), R::of(es[0])], [R::of(eu[1]), R::of(es[1])]];
    let det_b = basis[0][0] * basis[1][1] - basis[0][1] * basis[1][0];
    let basis_inv = [
        [basis[1][1] / det_b, -basis[0][1] / det_b],
        [-basis[1][0] / det_b, basis[0][0] / det_b],
    ];
    EigenSplit { lambda_u: R::of(lu), lambda_s: R::of(ls), basis, basis_inv }
}

/// Solve `H . f = A . H` on a `grid_n x grid_n` grid. Errors with
/// `NoConvergence` when the perturbation exceeds the contraction radius.
pub fn solve_linear_conjugacy<R: Real>(
    map: &PerturbedToralMap<R>,
    grid_n: usize,
    tol: R,
    max_iters: usize,
) -> Result<ConjugacyGrid<R>> {
    if grid_n < 8 {
        return Err(Error::InvalidParameter("conjugacy grid needs >= 8 nodes per axis".into()));
    }
    if !(tol > R::zero()) {
        return Err(Error::InvalidParameter("tol must be positive".into()));
    }
    let split = eigen_split::<R>(map.linear());
    let n = grid_n;
    let nf = R::of_usize(n);
    let node = |i: usize, j: usize| -> [R; 2] { [R::of_usize(i) / nf, R::of_usize(j) / nf] };

    // phi(x) = f(x) - A x = v + eps g(x), in eigencoordinates
    let a_int = map.linear();
    let phi_at = |x: [R; 2]| -> [R; 2] {
        let lift = map.lift(x);
        let ax = [
            R::of(a_int.get(0, 0) as f64) * x[0] + R::of(a_int.get(0, 1) as f64) * x[1],
            R::of(a_int.get(1, 0) as f64) * x[0] + R::of(a_int.get(1, 1) as f64) * x[1],
        ];
        mat_vec(&split.basis_inv, [lift[0] - ax[0], lift[1] - ax[1]])
    };

    let mut fwd = Vec::with_capacity(n * n);
    let mut bwd = Vec::with_capacity(n * n);
    let mut phi_node = Vec::with_capacity(n * n);
    let mut phi_bwd = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let x = node(i, j);
            fwd.push(map.eval(x));
            let pre = map.inverse(x)?;
            bwd.push(pre);
            phi_node.push(phi_at(x));
            phi_bwd.push(phi_at(pre));
        }
    }

    // a-priori contraction radius
    let sup_phi = phi_node
        .iter()
        .map(|p| p[0].hypot(p[1]))
        .fold(R::zero(), |a, b| a.max(b));
    let gap = (split.lambda_u.abs() - R::one()).min(R::one() - split.lambda_s.abs());
    let radius = sup_phi / gap * R::of(2.0);

    let interp = |grid: &Vec<[R; 2]>, x: [R; 2]| -> [R; 2] {
        // bilinear on eigencomponents, periodic
        let px = frac(x[0]) * nf;
        let py = frac(x[1]) * nf;
        let i0 = (px.floor().as_f64() as usize).min(n - 1);
        let j0 = (py.floor().as_f64() as usize).min(n - 1);
        let tx = px - R::of_usize(i0);
        let ty = py - R::of_usize(j0);
        let i1 = (i0 + 1) % n;
        let j1 = (j0 + 1) % n;
        let one = R::one();
        let mut out = [R::zero(); 2];
        for c in 0..2 {
            out[c] = (one - tx) * (one - ty) * grid[i0 * n + j0][c]
                + tx * (one - ty) * grid[i1 * n + j0][c]
                + (one - tx) * ty * grid[i0 * n + j1][c]
                + tx * ty * grid[i1 * n + j1][c];
        }
        out
    };

    // components (u+, u-) on the grid
    let mut comp: Vec<[R; 2]> = vec![[R::zero(); 2]; n * n];
    let mut residual = R::infinity();
    for _ in 0..max_iters {
        let mut next: Vec<[R; 2]> = Vec::with_capacity(n * n);
        for idx in 0..n * n {
            let up = (interp(&comp, fwd[idx])[0] + phi_node[idx][0]) / split.lambda_u;
            let um = split.lambda_s * interp(&comp, bwd[idx])[1] - phi_bwd[idx][1];
            next.push([up, um]);
        }
        // functional-equation residual in xy-coordinates at the nodes
        residual = R::zero();
        for idx in 0..n * n {
            let u_here = mat_vec(&split.basis, next[idx]);
            let u_fwd = mat_vec(&split.basis, interp(&next, fwd[idx]));
            let phi_xy = mat_vec(&split.basis, phi_node[idx]);
            let au = [
                R::of(a_int.get(0, 0) as f64) * u_here[0] + R::of(a_int.get(0, 1) as f64) * u_here[1],
                R::of(a_int.get(1, 0) as f64) * u_here[0] + R::of(a_int.get(1, 1) as f64) * u_here[1],
            ];
            let r = [au[0] - u_fwd[0] - phi_xy[0], au[1] - u_fwd[1] - phi_xy[1]];
            residual = residual.max(r[0].hypot(r[1]));
        }
        comp = next;
        if residual < tol {
            let disp = comp.iter().map(|c| mat_vec(&split.basis, *c)).collect();
            return Ok(ConjugacyGrid { n, disp, radius });
        }
    }
    Err(Error::NoConvergence { iterations: max_iters, residual: residual.as_f64() })
}

/// Sup residual `||H(f(x)) - A H(x) mod Z^2||` of a solved grid, evaluated on
/// a `factor`-times finer verification grid.
pub fn conjugacy_residual<R: Real>(
    map: &PerturbedToralMap<R>,
    h: &ConjugacyGrid<R>,
    factor: usize,
) -> R {
    let m = h.n() * factor.max(1);
    let mf = R::of_usize(m);
    let a = map.linear();
    let wrap_half = |t: R| -> R {
        let f = frac(t);
        if f > R::of(0.5) {
            f - R::one()
        } else {
            f
        }
    };
    let mut worst = R::zero();
    for i in 0..m {
        for j in 0..m {
            let x = [R::of_usize(i) / mf, R::of_usize(j) / mf];
            let u_here = h.displacement(x);
            let hx = [x[0] + u_here[0], x[1] + u_here[1]];
            let fx = map.eval(x);
            let u_fx = h.displacement(fx);
            let lift = map.lift(x);
            let hfx = [lift[0] + u_fx[0], lift[1] + u_fx[1]];
            let ahx = [
                R::of(a.get(0, 0) as f64) * hx[0] + R::of(a.get(0, 1) as f64) * hx[1],
                R::of(a.get(1, 0) as f64) * hx[0] + R::of(a.get(1, 1) as f64) * hx[1],
            ];
            let r = [wrap_half(hfx[0] - ahx[0]), wrap_half(hfx[1] - ahx[1])];
            worst = worst.max(r[0].hypot(r[1]));
        }
    }
    worst
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct TranslationCheck<R> {
    pub is_translation: bool,
    /// circular mean displacement per coordinate, in [0,1)^2
    pub v: [R; 2],
    /// sup circular deviation from `v`
    pub residual: R,
}

/// Test whether `H1 . H2^{-1} - id` is constant on the grid. `None` for `H1`
/// means the identity.
pub fn verify_translation<R: Real>(
    h1: Option<&ConjugacyGrid<R>>,
    h2: &ConjugacyGrid<R>,
    tol: R,
) -> TranslationCheck<R> {
    let n = h2.n();
    let nf = R::of_usize(n);
    let mut dx = Vec::with_capacity(n * n);
    let mut dy = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let x = [R::of_usize(i) / nf, R::of_usize(j) / nf];
            let y = h2.inverse(x);
            let z = match h1 {
                Some(h) => h.eval(y),
                None => y,
            };
            dx.push(frac(z[0] - x[0]));
            dy.push(frac(z[1] - x[1]));
        }
    }
    let v = [circular_mean(&dx), circular_mean(&dy)];
    let mut residual = R::zero();
    for k in 0..dx.len() {
        residual = residual.max(circ_dist(dx[k], v[0])).max(circ_dist(dy[k], v[1]));
    }
    TranslationCheck { is_translation: residual < tol, v, residual }
}

/// Displacement grid of `h . f . h^{-1} . A^{-1}`; constant displacement `v`
/// exactly when `h . f . h^{-1} = A + v`.
pub fn conjugate_map_grid<R: Real>(
    h: &ConjugacyGrid<R>,
    map: &PerturbedToralMap<R>,
    grid_n: usize,
) -> Result<ConjugacyGrid<R>> {
    let ainv = map.linear().inverse_2x2()?;
    let nf = R::of_usize(grid_n);
    let mut disp = Vec::with_capacity(grid_n * grid_n);
    for i in 0..grid_n {
        for j in 0..grid_n {
            let x = [R::of_usize(i) / nf, R::of_usize(j) / nf];
            let pre = ainv.apply_vec(&[x[0], x[1]]);
            let pre = [frac(pre[0]), frac(pre[1])];
            let w = h.eval(map.eval(h.inverse(pre)));
            disp.push([frac(w[0] - x[0]), frac(w[1] - x[1])]);
        }
    }
    ConjugacyGrid::from_displacements(grid_n, disp, R::one())
}

//! Deterministic polynomial root finder for the numeric eigenvalue lane.
//!
//! Durand-Kerner iteration on the exact integer characteristic polynomial,
//! followed by a few Newton polish steps. Degrees here are at most 6 and the
//! polynomials are separable in every hyperbolic case we feed in, so plain
//! double precision reaches ~1e-14.

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct C64 {
    pub re: f64,
    pub im: f64,
}

impl C64 {
    pub fn new(re: f64, im: f64) -> Self {
        C64 { re, im }
    }

    pub fn abs(self) -> f64 {
        self.re.hypot(self.im)
    }

    fn add(self, o: C64) -> C64 {
        C64::new(self.re + o.re, self.im + o.im)
    }

    fn sub(self, o: C64) -> C64 {
        C64::new(self.re - o.re, self.im - o.im)
    }

    fn mul(self, o: C64) -> C64 {
        C64::new(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)
    }

    fn div(self, o: C64) -> C64 {
        let d = o.re * o.re + o.im * o.im;
        C64::new((self.re * o.re + self.im * o.im) / d, (self.im * o.re - self.re * o.im) / d)
    }
}

fn eval(coeffs: &[f64], z: C64) -> C64 {
    let mut acc = C64::new(0.0, 0.0);
    for &c in coeffs.iter().rev() {
        acc = acc.mul(z).add(C64::new(c, 0.0));
    }
    acc
}

fn eval_deriv(coeffs: &[f64], z: C64) -> C64 {
    let mut acc = C64::new(0.0, 0.0);
    for (k, &c) in coeffs.iter().enumerate().skip(1).rev() {
        acc = acc.mul(z).add(C64::new(c * k as f64, 0.0));
    }
    acc
}

/// All complex roots of a polynomial with ascending real coefficients and
/// nonzero leading coefficient. Quadratics use the closed form.
pub fn poly_roots(coeffs: &[f64]) -> Vec<C64> {
    let n = coeffs.len() - 1;
    assert!(n >= 1 && coeffs[n] != 0.0, "need a genuine degree");
    let monic: Vec<f64> = coeffs.iter().map(|&c| c / coeffs[n]).collect();
    if n == 1 {
        return vec![C64::new(-monic[0], 0.0)];
    }
    if n == 2 {
        let (c, b) = (monic[0], monic[1]);
        let disc = b * b - 4.0 * c;
        if disc >= 0.0 {
            let s = disc.sqrt();
            // stable form: avoid cancellation in the smaller root
            let q = -0.5 * (b + b.signum() * s);
            let (r1, r2) = if b == 0.0 {
                (s / 2.0, -s / 2.0)
            } else {
                (q, c / q)
            };
            return vec![C64::new(r1, 0.0), C64::new(r2, 0.0)];
        }
        let s = (-disc).sqrt() / 2.0;
        return vec![C64::new(-b / 2.0, s), C64::new(-b / 2.0, -s)];
    }

    let bound = 1.0 + monic.iter().take(n).map(|c| c.abs()).fold(0.0f64, f64::max);
    let mut z: Vec<C64> = (0..n)
        .map(|k| {
            let ang = std::f64::consts::TAU * (k as f64 + 0.37) / n as f64;
            C64::new(bound * 0.8 * ang.cos(), bound * 0.8 * ang.sin())
        })
        .collect();
    for _ in 0..600 {
        let mut max_step = 0.0f64;
        for i in 0..n {
            let mut denom = C64::new(1.0, 0.0);
            for j in 0..n {
                if i != j {
                    denom = denom.mul(z[i].sub(z[j]));
                }
            }
            let step = eval(&monic, z[i]).div(denom);
            z[i] = z[i].sub(step);
            max_step = max_step.max(step.abs());
        }
        if max_step < 1e-15 * bound {
            break;
        }
    }
    for zi in &mut z {
        for _ in 0..3 {
            let d = eval_deriv(&monic, *zi);
            if d.abs() > 1e-300 {
                *zi = zi.sub(eval(&monic, *zi).div(d));
            }
        }
    }
    z
}

//! Small numeric helpers shared across modules.

use crate::scalar::Real;

/// Kahan compensated accumulator. Long cocycle products accumulate millions
/// of logs; plain summation loses digits the 1e7-step oracles need.
#[derive(Clone, Copy, Debug)]
pub struct Kahan<R> {
    sum: R,
    carry: R,
}

impl<R: Real> Kahan<R> {
    pub fn new() -> Self {
        Kahan { sum: R::zero(), carry: R::zero() }
    }

    pub fn add(&mut self, x: R) {
        let y = x - self.carry;
        let t = self.sum + y;
        self.carry = (t - self.sum) - y;
        self.sum = t;
    }

    pub fn value(&self) -> R {
        self.sum
    }
}

impl<R: Real> Default for Kahan<R> {
    fn default() -> Self {
        Self::new()
    }
}

pub fn kahan_sum<R: Real>(xs: impl IntoIterator<Item = R>) -> R {
    let mut acc = Kahan::new();
    for x in xs {
        acc.add(x);
    }
    acc.value()
}

/// Fractional part in `[0, 1)`.
pub fn frac<R: Real>(x: R) -> R {
    let f = x - x.floor();
    // x slightly below an integer can round to 1.0 exactly.
    if f >= R::one() {
        R::zero()
    } else {
        f
    }
}

/// Distance on the circle `R/Z`, in `[0, 1/2]`.
pub fn circ_dist<R: Real>(a: R, b: R) -> R {
    let d = frac(a - b);
    d.min(R::one() - d)
}

/// Circular mean of values on `R/Z` via unit phasors, result in `[0, 1)`.
pub fn circular_mean<R: Real>(values: &[R]) -> R {
    let mut c = Kahan::new();
    let mut s = Kahan::new();
    for &v in values {
        let (sv, cv) = (v * R::tau()).sin_cos();
        s.add(sv);
        c.add(cv);
    }
    frac(s.value().atan2(c.value()) / R::tau())
}

/// Mean and standard error (ddof = 1) of per-replica estimates.
/// Returns stderr 0 for a single replica.
pub fn mean_stderr<R: Real>(xs: &[R]) -> (R, R) {
    let n = xs.len();
    assert!(n > 0, "empty sample");
    let mean = kahan_sum(xs.iter().copied()) / R::of_usize(n);
    if n == 1 {
        return (mean, R::zero());
    }
    let ss = kahan_sum(xs.iter().map(|&x| (x - mean) * (x - mean)));
    let var = ss / R::of_usize(n - 1);
    (mean, (var / R::of_usize(n)).sqrt())
}

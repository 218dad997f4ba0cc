//! Deterministic random streams.
//!
//! Every Monte Carlo task derives its own ChaCha stream from the master seed
//! by a fixed counter scheme: the 64-bit stream id is `purpose << 48 | index`.
//! Streams are independent of scheduling, so orbit-parallel runs reduce in
//! index order and reproduce the sequential result bit for bit.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::scalar::Real;

#[derive(Clone, Copy, Debug)]
#[repr(u64)]
pub enum StreamPurpose {
    BirkhoffOrbit = 1,
    QFunctional = 2,
    TopLyapunov = 3,
    QrSpectrum = 4,
    TorusOrbit = 5,
    DispersionPoint = 6,
    DispersionWord = 7,
    SystemDraw = 8,
}

pub fn derive_stream(master_seed: u64, purpose: StreamPurpose, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    debug_assert!(index < (1 << 48), "stream index too large");
    rng.set_stream(((purpose as u64) << 48) | (index & ((1 << 48) - 1)));
    rng
}

/// Uniform draw in `[0, 1)` converted into the working scalar. Drawing `f64`
/// first keeps the stream identical across scalar instantiations.
pub fn uniform<R: Real>(rng: &mut ChaCha8Rng) -> R {
    R::of(rng.gen::<f64>())
}

/// Sample an index from a probability vector by inverse CDF.
pub fn pick_index<R: Real>(rng: &mut ChaCha8Rng, probs: &[R]) -> usize {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    for (i, p) in probs.iter().enumerate() {
        acc += p.as_f64();
        if u < acc {
            return i;
        }
    }
    probs.len() - 1
}

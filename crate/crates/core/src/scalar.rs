//! Scalar abstraction for the floating-point lane.
//!
//! All estimators and solvers are generic over [`Real`]; the crate root
//! exposes `f64` aliases which is what the CLI and the acceptance suite use.
//! Exact certificates (integer matrices, characteristic polynomials) live on
//! `i64`/`i128` and bypass this trait entirely.

use num_traits::{Float, FromPrimitive, NumAssignOps};

pub trait Real:
    Float + FromPrimitive + NumAssignOps + std::fmt::Debug + std::fmt::Display + Send + Sync + 'static
{
    /// Lossless-enough import of an `f64` constant or RNG draw.
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("finite f64 literal")
    }

    fn of_usize(n: usize) -> Self {
        Self::from_usize(n).expect("usize fits scalar")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().expect("scalar fits f64")
    }

    fn tau() -> Self {
        Self::of(std::f64::consts::TAU)
    }
}

impl<T> Real for T where
    T: Float
        + FromPrimitive
        + NumAssignOps
        + std::fmt::Debug
        + std::fmt::Display
        + Send
        + Sync
        + 'static
{
}

//! Numerical laboratory for Lyapunov-spectrum rigidity of random dynamics.
//!
//! The crate computes stationary SRB densities and Lyapunov exponents for
//! random expanding circle maps and random perturbed toral automorphisms,
//! certifies the exponent inequalities against the algebraic model, detects
//! the equality (rigidity) case, and constructs and verifies the linearizing
//! conjugacies that equality forces.
//!
//! Floating-point numerics are generic over [`scalar::Real`] (`f32`/`f64`);
//! the aliases at the crate root pin `f64`, which is what the CLI and the
//! acceptance suite use. Integer certificates (determinants, characteristic
//! polynomials, irreducibility, cone preservation for `GL(2,Z)`) are exact.

pub mod circle;
pub mod cocycle;
pub mod error;
pub mod export;
pub mod rigidity;
pub mod rng;
pub mod scalar;
pub mod torus;
pub mod transfer;
mod util;

pub use error::{Error, Result};
pub use scalar::Real;
pub use util::{circ_dist, circular_mean, frac};

pub type ExpandingCircleMap = circle::ExpandingCircleMap<f64>;
pub type TrigTerm = circle::TrigTerm<f64>;
pub type RandomCircleSystem = circle::RandomCircleSystem<f64>;
pub type ExpansionCertificate = circle::ExpansionCertificate<f64>;
pub type UlamOperator = transfer::UlamOperator<f64>;
pub type UlamDensity = transfer::UlamDensity<f64>;
pub type ExponentEstimate = transfer::ExponentEstimate<f64>;
pub type CircleConjugacy = rigidity::CircleConjugacy<f64>;
pub type RigidityReport = rigidity::RigidityReport<f64>;
pub type TrigDiffeo = rigidity::TrigDiffeo<f64>;
pub type ConePair = cocycle::ConePair<f64>;
pub type SpectrumEstimate = cocycle::SpectrumEstimate<f64>;
pub type PerturbedToralMap = torus::PerturbedToralMap<f64>;
pub type RandomToralSystem = torus::RandomToralSystem<f64>;
pub type TrigPoly2 = torus::TrigPoly2<f64>;
pub type TrigDiffeo2 = torus::TrigDiffeo2<f64>;
pub type ConjugacyGrid = torus::ConjugacyGrid<f64>;

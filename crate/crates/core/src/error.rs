use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Expansion certificate failed: the certified lower bound on |F'| minus
    /// one is not positive. The caller must reject the map.
    #[error("map is not uniformly expanding (certified margin {margin:.6e})")]
    NotExpanding { margin: f64 },

    #[error("invalid random system: {0}")]
    InvalidSystem(String),

    #[error("no convergence after {iterations} iterations (residual {residual:.3e})")]
    NoConvergence { iterations: usize, residual: f64 },

    /// A stationary density bin fell below 1e-12: 1/q is no longer
    /// numerically integrable and conjugacy construction is unsafe.
    #[error("degenerate stationary density at bin {bin}")]
    DegenerateDensity { bin: usize },

    #[error("unsupported family: {0}")]
    UnsupportedFamily(String),

    #[error("cone not preserved by matrix {matrix_index} on boundary ray ({}, {})", ray[0], ray[1])]
    ConeNotPreserved { matrix_index: usize, ray: [i64; 2] },

    #[error("cone field violated by map {map_index} near ({x:.6}, {y:.6})")]
    ConeViolation { map_index: usize, x: f64, y: f64 },

    #[error("matrix is not hyperbolic")]
    NotHyperbolic,

    #[error("eigenvalue modulus group of size {size} exceeds 2")]
    BlockTooLarge { size: usize },

    #[error("dimension {dim} unsupported here (expected {min}..={max})")]
    DimensionUnsupported { dim: usize, min: usize, max: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("trigonometric fit residual {residual:.3e} exceeds limit {limit:.3e}")]
    FitResidual { residual: f64, limit: f64 },

    #[error("integer overflow in exact arithmetic")]
    Overflow,
}

pub type Result<T> = std::result::Result<T, Error>;

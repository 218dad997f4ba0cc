//! Experiment configs: one JSON document per run, strict about unknown keys.
//!
//! The `experiment` tag picks the schema; everything else is validated
//! before any computation starts. Matrices parse from row-major integer
//! lists, circle maps from `{degree, rotation, coeffs: [[k, a, b], ...]}`.

use serde::Deserialize;

use rigidity_core::circle;
use rigidity_core::cocycle::{ConePair as CoreConePair, IntMatrix, MatrixFamily};
use rigidity_core::torus;
use rigidity_core::{ExpandingCircleMap, PerturbedToralMap, RandomCircleSystem, RandomToralSystem};

pub const EXPERIMENT_NAMES: [&str; 7] = [
    "s1-rigidity",
    "matrix-exponents",
    "torus-exponents",
    "cone-check",
    "generic-check",
    "conjugacy-solve",
    "bundle-dispersion",
];

#[derive(Debug)]
pub enum ConfigError {
    Parse(String),
    Invalid(String),
}

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ConfigError::Parse(m) => write!(f, "config parse error: {m}"),
            ConfigError::Invalid(m) => write!(f, "invalid config: {m}"),
        }
    }
}

fn invalid(e: impl std::fmt::Display) -> ConfigError {
    ConfigError::Invalid(e.to_string())
}

#[derive(Deserialize)]
struct Tag {
    experiment: String,
}

/// A fully parsed experiment, ready to run.
pub enum Experiment {
    S1Rigidity(S1RigidityConfig),
    MatrixExponents(MatrixExponentsConfig),
    TorusExponents(TorusExponentsConfig),
    ConeCheck(ConeCheckConfig),
    GenericCheck(GenericCheckConfig),
    ConjugacySolve(ConjugacySolveConfig),
    BundleDispersion(BundleDispersionConfig),
}

impl Experiment {
    pub fn name(&self) -> &'static str {
        match self {
            Experiment::S1Rigidity(_) => "s1-rigidity",
            Experiment::MatrixExponents(_) => "matrix-exponents",
            Experiment::TorusExponents(_) => "torus-exponents",
            Experiment::ConeCheck(_) => "cone-check",
            Experiment::GenericCheck(_) => "generic-check",
            Experiment::ConjugacySolve(_) => "conjugacy-solve",
            Experiment::BundleDispersion(_) => "bundle-dispersion",
        }
    }

    pub fn seed(&self) -> u64 {
        match self {
            Experiment::S1Rigidity(c) => c.seed,
            Experiment::MatrixExponents(c) => c.seed,
            Experiment::TorusExponents(c) => c.seed,
            Experiment::ConeCheck(c) => c.seed,
            Experiment::GenericCheck(c) => c.seed,
            Experiment::ConjugacySolve(c) => c.seed,
            Experiment::BundleDispersion(c) => c.seed,
        }
    }

    pub fn set_seed(&mut self, seed: u64) {
        match self {
            Experiment::S1Rigidity(c) => c.seed = seed,
            Experiment::MatrixExponents(c) => c.seed = seed,
            Experiment::TorusExponents(c) => c.seed = seed,
            Experiment::ConeCheck(c) => c.seed = seed,
            Experiment::GenericCheck(c) => c.seed = seed,
            Experiment::ConjugacySolve(c) => c.seed = seed,
            Experiment::BundleDispersion(c) => c.seed = seed,
        }
    }

    pub fn output_basename(&self) -> Option<&str> {
        let name = match self {
            Experiment::S1Rigidity(c) => &c.output_basename,
            Experiment::MatrixExponents(c) => &c.output_basename,
            Experiment::TorusExponents(c) => &c.output_basename,
            Experiment::ConeCheck(c) => &c.output_basename,
            Experiment::GenericCheck(c) => &c.output_basename,
            Experiment::ConjugacySolve(c) => &c.output_basename,
            Experiment::BundleDispersion(c) => &c.output_basename,
        };
        name.as_deref()
    }
}

pub fn parse(text: &str) -> Result<Experiment, ConfigError> {
    let tag: Tag =
        serde_json::from_str(text).map_err(|e| ConfigError::Parse(format!("{e}")))?;
    let parse_err = |e: serde_json::Error| ConfigError::Parse(format!("{e}"));
    match tag.experiment.as_str() {
        "s1-rigidity" => Ok(Experiment::S1Rigidity(serde_json::from_str(text).map_err(parse_err)?)),
        "matrix-exponents" => {
            Ok(Experiment::MatrixExponents(serde_json::from_str(text).map_err(parse_err)?))
        }
        "torus-exponents" => {
            Ok(Experiment::TorusExponents(serde_json::from_str(text).map_err(parse_err)?))
        }
        "cone-check" => Ok(Experiment::ConeCheck(serde_json::from_str(text).map_err(parse_err)?)),
        "generic-check" => {
            Ok(Experiment::GenericCheck(serde_json::from_str(text).map_err(parse_err)?))
        }
        "conjugacy-solve" => {
            Ok(Experiment::ConjugacySolve(serde_json::from_str(text).map_err(parse_err)?))
        }
        "bundle-dispersion" => {
            Ok(Experiment::BundleDispersion(serde_json::from_str(text).map_err(parse_err)?))
        }
        other => Err(ConfigError::Invalid(format!(
            "unknown experiment {other:?}; valid names: {}",
            EXPERIMENT_NAMES.join(", ")
        ))),
    }
}

// ---- shared system blocks ----

#[derive(Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CircleMapConfig {
    pub degree: i64,
    pub rotation: f64,
    #[serde(default)]
    pub coeffs: Vec<(u32, f64, f64)>,
}

impl CircleMapConfig {
    pub fn build(&self) -> Result<ExpandingCircleMap, ConfigError> {
        ExpandingCircleMap::new(
            self.degree,
            self.rotation,
            self.coeffs.iter().map(|&(k, a, b)| circle::TrigTerm(k, a, b)).collect(),
        )
        .map_err(invalid)
    }
}

#[derive(Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CircleSystemConfig {
    pub maps: Vec<CircleMapConfig>,
    pub probs: Vec<f64>,
}

impl CircleSystemConfig {
    pub fn build(&self) -> Result<RandomCircleSystem, ConfigError> {
        let maps = self.maps.iter().map(|m| m.build()).collect::<Result<Vec<_>, _>>()?;
        RandomCircleSystem::new(maps, self.probs.clone()).map_err(invalid)
    }
}

#[derive(Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyConfig {
    pub dim: usize,
    /// row-major integer entries, one list per matrix
    pub matrices: Vec<Vec<i64>>,
    #[serde(default)]
    pub probs: Option<Vec<f64>>,
}

impl FamilyConfig {
    pub fn build(&self) -> Result<MatrixFamily, ConfigError> {
        let mats = self
            .matrices
            .iter()
            .map(|rows| IntMatrix::new(self.dim, rows.clone()))
            .collect::<Result<Vec<_>, _>>()
            .map_err(invalid)?;
        let probs = match &self.probs {
            Some(p) => p.clone(),
            None => vec![1.0 / mats.len() as f64; mats.len()],
        };
        MatrixFamily::new(mats, probs).map_err(invalid)
    }
}

#[derive(Clone, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "snake_case")]
pub enum ConesConfig {
    Quadrant,
    Axial { unstable_axis: [f64; 2], stable_axis: [f64; 2], kappa: f64 },
}

impl ConesConfig {
    pub fn build(&self) -> CoreConePair<f64> {
        match self {
            ConesConfig::Quadrant => CoreConePair::Quadrant,
            ConesConfig::Axial { unstable_axis, stable_axis, kappa } => CoreConePair::Axial {
                unstable_axis: *unstable_axis,
                stable_axis: *stable_axis,
                kappa: *kappa,
            },
        }
    }
}

fn default_cones() -> ConesConfig {
    ConesConfig::Quadrant
}

#[derive(Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToralMapConfig {
    /// row-major entries of the 2x2 linear part
    pub linear: [i64; 4],
    #[serde(default)]
    pub translation: [f64; 2],
    #[serde(default)]
    pub epsilon: f64,
    /// terms [k1, k2, a, b] of the first perturbation component
    #[serde(default)]
    pub gx: Vec<(i32, i32, f64, f64)>,
    #[serde(default)]
    pub gy: Vec<(i32, i32, f64, f64)>,
}

impl ToralMapConfig {
    pub fn build(&self) -> Result<PerturbedToralMap, ConfigError> {
        let [a, b, c, d] = self.linear;
        let to_poly = |terms: &Vec<(i32, i32, f64, f64)>| {
            torus::TrigPoly2::new(
                terms.iter().map(|&(k1, k2, aa, bb)| torus::Term2(k1, k2, aa, bb)).collect(),
            )
        };
        PerturbedToralMap::new(
            IntMatrix::from_2x2(a, b, c, d),
            self.translation,
            self.epsilon,
            [to_poly(&self.gx), to_poly(&self.gy)],
        )
        .map_err(invalid)
    }
}

#[derive(Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToralSystemConfig {
    pub maps: Vec<ToralMapConfig>,
    pub probs: Vec<f64>,
    #[serde(default = "default_cones")]
    pub cones: ConesConfig,
}

impl ToralSystemConfig {
    pub fn build(&self) -> Result<RandomToralSystem, ConfigError> {
        let maps = self.maps.iter().map(|m| m.build()).collect::<Result<Vec<_>, _>>()?;
        RandomToralSystem::new(maps, self.probs.clone(), self.cones.build()).map_err(invalid)
    }
}

// ---- per-experiment configs ----

fn default_n_bins() -> usize {
    4096
}
fn default_subdivisions() -> usize {
    480
}
fn default_threshold() -> f64 {
    5e-3
}
fn default_orbits() -> usize {
    16
}
fn default_steps() -> usize {
    200_000
}
fn default_burn_in() -> usize {
    1_000
}
fn default_n_test() -> usize {
    512
}
fn default_n_reps() -> usize {
    8
}
fn default_torus_steps() -> usize {
    100_000
}
fn default_grid_n() -> usize {
    256
}
fn default_tol() -> f64 {
    5e-7
}
fn default_max_iters() -> usize {
    400
}
fn default_n_points() -> usize {
    8
}
fn default_n_futures() -> usize {
    4
}
fn default_depth() -> usize {
    40
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct S1Params {
    #[serde(default = "default_n_bins")]
    pub n_bins: usize,
    #[serde(default = "default_subdivisions")]
    pub subdivisions: usize,
    #[serde(default = "default_threshold")]
    pub threshold: f64,
    #[serde(default = "default_orbits")]
    pub n_orbits: usize,
    #[serde(default = "default_steps")]
    pub n_steps: usize,
    #[serde(default = "default_burn_in")]
    pub burn_in: usize,
    #[serde(default = "default_n_test")]
    pub n_test: usize,
}

impl Default for S1Params {
    fn default() -> Self {
        serde_json::from_str("{}").expect("defaults")
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct S1RigidityConfig {
    #[allow(dead_code)]
    experiment: String,
    pub seed: u64,
    pub system: CircleSystemConfig,
    #[serde(default)]
    pub params: S1Params,
    #[serde(default)]
    pub output_basename: Option<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixParams {
    #[serde(default = "default_steps")]
    pub n_steps: usize,
    #[serde(default = "default_n_reps")]
    pub n_reps: usize,
}

impl Default for MatrixParams {
    fn default() -> Self {
        serde_json::from_str("{}").expect("defaults")
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixExponentsConfig {
    #[allow(dead_code)]
    experiment: String,
    pub seed: u64,
    pub family: FamilyConfig,
    #[serde(default)]
    pub params: MatrixParams,
    #[serde(default)]
    pub output_basename: Option<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TorusParams {
    #[serde(default = "default_orbits")]
    pub n_orbits: usize,
    #[serde(default = "default_torus_steps")]
    pub n_steps: usize,
    #[serde(default = "default_burn_in")]
    pub burn_in: usize,
}

impl Default for TorusParams {
    fn default() -> Self {
        serde_json::from_str("{}").expect("defaults")
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TorusExponentsConfig {
    #[allow(dead_code)]
    experiment: String,
    pub seed: u64,
    pub system: ToralSystemConfig,
    #[serde(default)]
    pub params: TorusParams,
    #[serde(default)]
    pub output_basename: Option<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConeCheckConfig {
    #[allow(dead_code)]
    experiment: String,
    #[serde(default)]
    pub seed: u64,
    pub family: FamilyConfig,
    #[serde(default = "default_cones")]
    pub cones: ConesConfig,
    #[serde(default)]
    pub output_basename: Option<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenericCheckConfig {
    #[allow(dead_code)]
    experiment: String,
    #[serde(default)]
    pub seed: u64,
    pub dim: usize,
    /// row-major entries
    pub matrix: Vec<i64>,
    #[serde(default)]
    pub output_basename: Option<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveParams {
    #[serde(default = "default_grid_n")]
    pub grid_n: usize,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_max_iters")]
    pub max_iters: usize,
    /// verification grid refinement factor
    #[serde(default = "default_verify_factor")]
    pub verify_factor: usize,
}

fn default_verify_factor() -> usize {
    4
}

impl Default for SolveParams {
    fn default() -> Self {
        serde_json::from_str("{}").expect("defaults")
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConjugacySolveConfig {
    #[allow(dead_code)]
    experiment: String,
    #[serde(default)]
    pub seed: u64,
    pub map: ToralMapConfig,
    /// cones used to validate the map before solving
    #[serde(default = "default_cones")]
    pub cones: ConesConfig,
    #[serde(default)]
    pub params: SolveParams,
    #[serde(default)]
    pub output_basename: Option<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DispersionParams {
    #[serde(default = "default_n_points")]
    pub n_points: usize,
    #[serde(default = "default_n_futures")]
    pub n_futures: usize,
    #[serde(default = "default_depth")]
    pub depth: usize,
}

impl Default for DispersionParams {
    fn default() -> Self {
        serde_json::from_str("{}").expect("defaults")
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BundleDispersionConfig {
    #[allow(dead_code)]
    experiment: String,
    pub seed: u64,
    pub system: ToralSystemConfig,
    #[serde(default)]
    pub params: DispersionParams,
    #[serde(default)]
    pub output_basename: Option<String>,
}

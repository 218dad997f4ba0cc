//! Experiment execution: each run returns the results block of the report
//! plus any CSV data files, and a short human-readable summary table.

use rigidity_core::export::{density_csv, estimate_json, floats, format_float_17, Json};
use rigidity_core::rigidity::{rigidity_pipeline_with, PipelineParams};
use rigidity_core::torus::{conjugacy_residual, solve_linear_conjugacy, stable_bundle_dispersion};
use rigidity_core::transfer::ExponentEstimate;
use rigidity_core::{cocycle, Error as CoreError};

use crate::config::{
    BundleDispersionConfig, ConeCheckConfig, ConjugacySolveConfig, Experiment, GenericCheckConfig,
    MatrixExponentsConfig, S1RigidityConfig, TorusExponentsConfig, EXPERIMENT_NAMES,
};

pub struct RunOutput {
    pub results: Json,
    pub data_files: Vec<(String, String)>,
    pub summary: String,
}

pub enum RunError {
    Compute(CoreError),
    Invalid(String),
}

impl From<CoreError> for RunError {
    fn from(e: CoreError) -> Self {
        RunError::Compute(e)
    }
}

pub fn descriptor_table() -> Vec<(&'static str, &'static str, &'static str)> {
    vec![
        (
            "s1-rigidity",
            "stationary density, exponent defect and affine-conjugacy verdict for a random circle system",
            "rigidity::rigidity_pipeline",
        ),
        (
            "matrix-exponents",
            "top exponent and full QR spectrum of an i.i.d. integer matrix product",
            "cocycle::top_lyapunov / cocycle::lyapunov_spectrum_qr",
        ),
        (
            "torus-exponents",
            "stationary-SRB exponent pair of a random perturbed toral system",
            "torus::srb_exponents",
        ),
        (
            "cone-check",
            "exact cone-hyperbolicity certificate for a GL(2,Z) family",
            "cocycle::certify_cone_hyperbolic",
        ),
        (
            "generic-check",
            "generic-automorphism test and finest dominated splitting",
            "cocycle::is_generic_automorphism",
        ),
        (
            "conjugacy-solve",
            "linearizing conjugacy H f = A H for one perturbed toral map",
            "torus::solve_linear_conjugacy",
        ),
        (
            "bundle-dispersion",
            "word-dependence statistic of the fiberwise stable bundle",
            "torus::stable_bundle_dispersion",
        ),
    ]
}

pub fn run(experiment: &Experiment) -> Result<RunOutput, RunError> {
    debug_assert_eq!(descriptor_table().len(), EXPERIMENT_NAMES.len());
    match experiment {
        Experiment::S1Rigidity(c) => s1_rigidity(c),
        Experiment::MatrixExponents(c) => matrix_exponents(c),
        Experiment::TorusExponents(c) => torus_exponents(c),
        Experiment::ConeCheck(c) => cone_check(c),
        Experiment::GenericCheck(c) => generic_check(c),
        Experiment::ConjugacySolve(c) => conjugacy_solve(c),
        Experiment::BundleDispersion(c) => bundle_dispersion(c),
    }
}

fn est_block(est: &ExponentEstimate<f64>, seed: u64, params: Json) -> Json {
    estimate_json(est, seed, params)
}

fn s1_rigidity(c: &S1RigidityConfig) -> Result<RunOutput, RunError> {
    let system = c.system.build().map_err(|e| RunError::Invalid(e.to_string()))?;
    let params = PipelineParams {
        subdivisions: c.params.subdivisions,
        invariance_subdivisions: c.params.subdivisions,
        birkhoff_orbits: c.params.n_orbits,
        birkhoff_steps: c.params.n_steps,
        birkhoff_burn_in: c.params.burn_in,
        n_test: c.params.n_test,
        ..PipelineParams::default()
    };
    let report =
        rigidity_pipeline_with(&system, c.params.n_bins, c.seed, c.params.threshold, &params)?;

    let mut summary = String::new();
    summary.push_str(&format!(
        "verdict: {}\n",
        if report.rigid { "RIGID (affine up to conjugacy)" } else { "NOT RIGID" }
    ));
    summary.push_str(&format!(
        "degree bound {:+.9}  exponent {:+.9}  defect {:+.3e}  threshold {:.1e}\n",
        report.degree_bound, report.exponent.value, report.defect, report.threshold
    ));
    summary.push_str("map |  rho_f      | affine residual | invariance defect\n");
    for (i, inv) in report.per_map_invariance_defect.iter().enumerate() {
        match &report.affine_residuals {
            Some(rs) => summary.push_str(&format!(
                "{i:3} | {:10.6} | {:15.3e} | {:.3e}\n",
                rs[i].0, rs[i].1, inv
            )),
            None => summary.push_str(&format!("{i:3} |      -     |        -        | {inv:.3e}\n")),
        }
    }

    let op = rigidity_core::transfer::build_annealed_ulam(
        &system,
        c.params.n_bins,
        c.params.subdivisions,
    )?;
    let q = rigidity_core::transfer::stationary_density(&op, 1e-10, 50_000)?;

    let mut results = Json::object()
        .with("rigid", Json::Bool(report.rigid))
        .with("degree_bound", Json::Float(report.degree_bound))
        .with(
            "exponent_quadrature",
            est_block(&report.exponent, c.seed, Json::object().with("n_bins", Json::UInt(c.params.n_bins as u64))),
        )
        .with(
            "exponent_birkhoff",
            est_block(
                &report.exponent_birkhoff,
                c.seed,
                Json::object()
                    .with("n_orbits", Json::UInt(c.params.n_orbits as u64))
                    .with("n_steps", Json::UInt(c.params.n_steps as u64))
                    .with("burn_in", Json::UInt(c.params.burn_in as u64)),
            ),
        )
        .with("defect", Json::Float(report.defect))
        .with("threshold", Json::Float(report.threshold))
        .with("invariance_defects", floats(report.per_map_invariance_defect.iter().copied()))
        .with("certified_margin", Json::Float(system.min_margin()));
    match &report.affine_residuals {
        Some(rs) => {
            results.push("rotation_numbers", floats(rs.iter().map(|r| r.0)));
            results.push("affine_residuals", floats(rs.iter().map(|r| r.1)));
        }
        None => {
            results.push("rotation_numbers", Json::Null);
            results.push("affine_residuals", Json::Null);
        }
    }
    let mut files = vec![("density.csv".to_string(), density_csv(&q))];
    if let Some(h) = &report.conjugacy {
        let n = h.n_cells();
        let doc = rigidity_core::export::csv_document(
            &["x", "h"],
            (0..=n).map(|j| {
                vec![format_float_17(j as f64 / n as f64), format_float_17(h.grid_values()[j])]
            }),
        );
        files.push(("conjugacy.csv".to_string(), doc));
    }
    Ok(RunOutput { results, data_files: files, summary })
}

fn matrix_exponents(c: &MatrixExponentsConfig) -> Result<RunOutput, RunError> {
    let family = c.family.build().map_err(|e| RunError::Invalid(e.to_string()))?;
    let top: ExponentEstimate<f64> =
        cocycle::top_lyapunov(&family, c.seed, c.params.n_steps, c.params.n_reps)?;
    let spec: cocycle::SpectrumEstimate<f64> =
        cocycle::lyapunov_spectrum_qr(&family, c.seed, c.params.n_steps, c.params.n_reps)?;
    let summary = format!(
        "top exponent {:+.9} +- {:.2e}\nspectrum [{}]\nspectrum sum {:+.3e} (+- {:.1e})\n",
        top.value,
        top.stderr,
        spec.exponents
            .iter()
            .zip(&spec.stderrs)
            .map(|(e, s)| format!("{e:+.9}+-{s:.1e}"))
            .collect::<Vec<_>>()
            .join(", "),
        spec.sum(),
        spec.sum_stderr()
    );
    let params = Json::object()
        .with("n_steps", Json::UInt(c.params.n_steps as u64))
        .with("n_reps", Json::UInt(c.params.n_reps as u64));
    let results = Json::object()
        .with("top", est_block(&top, c.seed, params))
        .with("spectrum", floats(spec.exponents.iter().copied()))
        .with("spectrum_stderrs", floats(spec.stderrs.iter().copied()))
        .with("spectrum_sum", Json::Float(spec.sum()));
    Ok(RunOutput { results, data_files: Vec::new(), summary })
}

fn torus_exponents(c: &TorusExponentsConfig) -> Result<RunOutput, RunError> {
    let system = c.system.build().map_err(|e| RunError::Invalid(e.to_string()))?;
    let spec = rigidity_core::torus::srb_exponents(
        &system,
        c.seed,
        c.params.n_orbits,
        c.params.n_steps,
        c.params.burn_in,
    )?;
    let summary = format!(
        "cone expansion gamma {:+.6}\nlambda+ {:+.9} +- {:.2e}\nlambda- {:+.9} +- {:.2e}\n",
        system.gamma(),
        spec.exponents[0],
        spec.stderrs[0],
        spec.exponents[1],
        spec.stderrs[1]
    );
    let results = Json::object()
        .with("gamma", Json::Float(system.gamma()))
        .with("exponents", floats(spec.exponents.iter().copied()))
        .with("stderrs", floats(spec.stderrs.iter().copied()))
        .with(
            "params",
            Json::object()
                .with("n_orbits", Json::UInt(c.params.n_orbits as u64))
                .with("n_steps", Json::UInt(c.params.n_steps as u64))
                .with("burn_in", Json::UInt(c.params.burn_in as u64)),
        );
    Ok(RunOutput { results, data_files: Vec::new(), summary })
}

fn cone_check(c: &ConeCheckConfig) -> Result<RunOutput, RunError> {
    let family = c.family.build().map_err(|e| RunError::Invalid(e.to_string()))?;
    let cert = cocycle::certify_cone_hyperbolic(&family, &c.cones.build())?;
    let mut summary = format!(
        "certificate {}; gamma {:+.12}\n",
        if cert.ok { "OK" } else { "FAILED (no uniform expansion)" },
        cert.gamma
    );
    for (i, b) in cert.per_matrix.iter().enumerate() {
        summary.push_str(&format!(
            "matrix {i}: unstable expansion {:.12}, stable expansion {:.12}\n",
            b.unstable_expansion, b.stable_expansion
        ));
    }
    let results = Json::object()
        .with("ok", Json::Bool(cert.ok))
        .with("gamma", Json::Float(cert.gamma))
        .with(
            "unstable_expansions",
            floats(cert.per_matrix.iter().map(|b| b.unstable_expansion)),
        )
        .with(
            "stable_expansions",
            floats(cert.per_matrix.iter().map(|b| b.stable_expansion)),
        );
    Ok(RunOutput { results, data_files: Vec::new(), summary })
}

fn generic_check(c: &GenericCheckConfig) -> Result<RunOutput, RunError> {
    let matrix = cocycle::IntMatrix::new(c.dim, c.matrix.clone())
        .map_err(|e| RunError::Invalid(e.to_string()))?;
    let report = cocycle::is_generic_automorphism(&matrix)?;
    let splitting = if report.hyperbolic {
        Some(cocycle::finest_dominated_splitting(&matrix)?)
    } else {
        None
    };
    let mut summary = format!(
        "generic: {} (exact arithmetic: {})\nhyperbolic {}, char irreducible {}, char(A^4) irreducible {}, modulus rule {}\n",
        report.generic, report.exact, report.hyperbolic, report.char_irreducible,
        report.char_pow4_irreducible, report.modulus_rule
    );
    for r in &report.reasons {
        summary.push_str(&format!("  reason: {r}\n"));
    }
    if let Some(blocks) = &splitting {
        summary.push_str("finest dominated splitting (log modulus, dim):\n");
        for b in blocks {
            summary.push_str(&format!("  ({:+.9}, {})\n", b.log_modulus, b.dim));
        }
    }
    let mut results = Json::object()
        .with("generic", Json::Bool(report.generic))
        .with("exact", Json::Bool(report.exact))
        .with("hyperbolic", Json::Bool(report.hyperbolic))
        .with("char_irreducible", Json::Bool(report.char_irreducible))
        .with("char_pow4_irreducible", Json::Bool(report.char_pow4_irreducible))
        .with("modulus_rule", Json::Bool(report.modulus_rule))
        .with(
            "reasons",
            Json::Array(report.reasons.iter().map(|r| Json::Str(r.clone())).collect()),
        )
        .with(
            "char_poly",
            Json::Array(
                matrix
                    .char_poly()?
                    .coeffs()
                    .iter()
                    .map(|&c| Json::Int(c as i64))
                    .collect(),
            ),
        );
    match splitting {
        Some(blocks) => {
            results.push(
                "splitting",
                Json::Array(
                    blocks
                        .iter()
                        .map(|b| {
                            Json::object()
                                .with("log_modulus", Json::Float(b.log_modulus))
                                .with("dim", Json::UInt(b.dim as u64))
                        })
                        .collect(),
                ),
            );
        }
        None => {
            results.push("splitting", Json::Null);
        }
    }
    Ok(RunOutput { results, data_files: Vec::new(), summary })
}

fn conjugacy_solve(c: &ConjugacySolveConfig) -> Result<RunOutput, RunError> {
    let map = c.map.build().map_err(|e| RunError::Invalid(e.to_string()))?;
    // validate hyperbolicity/cones through the system constructor
    let system = rigidity_core::RandomToralSystem::new(vec![map], vec![1.0], c.cones.build())?;
    let map = &system.maps()[0];
    let h = solve_linear_conjugacy(map, c.params.grid_n, c.params.tol, c.params.max_iters)?;
    let residual = conjugacy_residual(map, &h, c.params.verify_factor);
    let summary = format!(
        "solved on {0}x{0} grid; sup displacement {1:.6e} (radius {2:.3e})\nfunctional-equation residual on {3}x finer grid: {4:.6e}\n",
        h.n(),
        h.sup_displacement(),
        h.radius(),
        c.params.verify_factor,
        residual
    );
    let n = h.n();
    let doc = rigidity_core::export::csv_document(
        &["x", "y", "ux", "uy"],
        (0..n).flat_map(|i| {
            let h = &h;
            (0..n).map(move |j| {
                let d = h.node(i, j);
                vec![
                    format_float_17(i as f64 / n as f64),
                    format_float_17(j as f64 / n as f64),
                    format_float_17(d[0]),
                    format_float_17(d[1]),
                ]
            })
        }),
    );
    let results = Json::object()
        .with("grid_n", Json::UInt(h.n() as u64))
        .with("sup_displacement", Json::Float(h.sup_displacement()))
        .with("radius", Json::Float(h.radius()))
        .with("verify_factor", Json::UInt(c.params.verify_factor as u64))
        .with("residual", Json::Float(residual))
        .with("gamma", Json::Float(system.gamma()));
    Ok(RunOutput {
        results,
        data_files: vec![("conjugacy.csv".to_string(), doc)],
        summary,
    })
}

fn bundle_dispersion(c: &BundleDispersionConfig) -> Result<RunOutput, RunError> {
    let system = c.system.build().map_err(|e| RunError::Invalid(e.to_string()))?;
    let stats = stable_bundle_dispersion(
        &system,
        c.seed,
        c.params.n_points,
        c.params.n_futures,
        c.params.depth,
    )?;
    let summary = format!(
        "stable-bundle dispersion over {} points x {} futures (depth {}):\nmax angle {:.6e} rad, mean angle {:.6e} rad\n",
        c.params.n_points, c.params.n_futures, c.params.depth, stats.max_angle, stats.mean_angle
    );
    let results = Json::object()
        .with("max_angle", Json::Float(stats.max_angle))
        .with("mean_angle", Json::Float(stats.mean_angle))
        .with(
            "params",
            Json::object()
                .with("n_points", Json::UInt(c.params.n_points as u64))
                .with("n_futures", Json::UInt(c.params.n_futures as u64))
                .with("depth", Json::UInt(c.params.depth as u64)),
        );
    // stable-direction field for one representative future word, for plotting
    let mut wrng = rigidity_core::rng::derive_stream(
        c.seed,
        rigidity_core::rng::StreamPurpose::DispersionWord,
        0,
    );
    let word: Vec<usize> = (0..c.params.depth)
        .map(|_| rigidity_core::rng::pick_index(&mut wrng, system.probs()))
        .collect();
    let grid = 16usize;
    let mut rows = Vec::with_capacity(grid * grid);
    for i in 0..grid {
        for j in 0..grid {
            let x = [i as f64 / grid as f64, j as f64 / grid as f64];
            let dir = rigidity_core::torus::stable_direction(&system, &word, x, c.params.depth)?;
            rows.push(vec![
                format_float_17(x[0]),
                format_float_17(x[1]),
                format_float_17(dir[0]),
                format_float_17(dir[1]),
            ]);
        }
    }
    let field = rigidity_core::export::csv_document(&["x", "y", "sx", "sy"], rows);
    Ok(RunOutput {
        results,
        data_files: vec![("stable_field.csv".to_string(), field)],
        summary,
    })
}

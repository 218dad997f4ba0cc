//! rigidity-lab: seeded, reproducible experiments on Lyapunov rigidity.
//!
//! `rigidity-lab run <config.json> [--output-dir DIR] [--seed-override N]`
//! executes one experiment and writes a self-describing JSON report plus any
//! CSV data files; identical inputs produce byte-identical reports. `list`
//! prints the experiment table. Exit codes: 0 report written, 2 config
//! error, 3 computation error.

mod config;
mod experiments;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use rigidity_core::export::{fnv1a64, Json};

use crate::experiments::RunError;

const USAGE: &str = "usage:
  rigidity-lab run <config.json> [--output-dir DIR] [--seed-override N]
  rigidity-lab list";

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    match args.first().map(String::as_str) {
        Some("list") => {
            list();
            ExitCode::SUCCESS
        }
        Some("run") => run_command(&args[1..]),
        Some("--help") | Some("-h") | None => {
            println!("{USAGE}");
            ExitCode::SUCCESS
        }
        Some(other) => {
            eprintln!("unknown command {other:?}\n{USAGE}");
            ExitCode::from(2)
        }
    }
}

fn list() {
    println!("{:<18} {:<38} description", "experiment", "entry point");
    for (name, desc, entry) in experiments::descriptor_table() {
        println!("{name:<18} {entry:<38} {desc}");
    }
}

struct RunArgs {
    config_path: PathBuf,
    output_dir: PathBuf,
    seed_override: Option<u64>,
}

fn parse_run_args(args: &[String]) -> Result<RunArgs, String> {
    let mut config_path = None;
    let mut output_dir = PathBuf::from(".");
    let mut seed_override = None;
    let mut it = args.iter();
    while let Some(arg) = it.next() {
        match arg.as_str() {
            "--output-dir" => {
                output_dir =
                    PathBuf::from(it.next().ok_or("--output-dir needs a value")?.as_str());
            }
            "--seed-override" => {
                seed_override = Some(
                    it.next()
                        .ok_or("--seed-override needs a value")?
                        .parse::<u64>()
                        .map_err(|e| format!("bad seed: {e}"))?,
                );
            }
            flag if flag.starts_with('-') => return Err(format!("unknown flag {flag:?}")),
            path if config_path.is_none() => config_path = Some(PathBuf::from(path)),
            extra => return Err(format!("unexpected argument {extra:?}")),
        }
    }
    Ok(RunArgs {
        config_path: config_path.ok_or("missing config path")?,
        output_dir,
        seed_override,
    })
}

fn run_command(args: &[String]) -> ExitCode {
    let run_args = match parse_run_args(args) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("{e}\n{USAGE}");
            return ExitCode::from(2);
        }
    };
    let raw = match std::fs::read(&run_args.config_path) {
        Ok(b) => b,
        Err(e) => {
            eprintln!("cannot read {}: {e}", run_args.config_path.display());
            return ExitCode::from(2);
        }
    };
    let text = match std::str::from_utf8(&raw) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("config is not UTF-8: {e}");
            return ExitCode::from(2);
        }
    };
    let mut experiment = match config::parse(text) {
        Ok(x) => x,
        Err(e) => {
            eprintln!("{e}");
            return ExitCode::from(2);
        }
    };
    if let Some(seed) = run_args.seed_override {
        experiment.set_seed(seed);
    }

    // resolved config for the report: the parsed JSON with the effective seed
    let mut value: serde_json::Value = serde_json::from_str(text).expect("already parsed once");
    if let Some(obj) = value.as_object_mut() {
        obj.insert("seed".to_string(), serde_json::json!(experiment.seed()));
    }

    let output = match experiments::run(&experiment) {
        Ok(o) => o,
        Err(RunError::Invalid(msg)) => {
            eprintln!("invalid config: {msg}");
            return ExitCode::from(2);
        }
        Err(RunError::Compute(e)) => {
            eprintln!("computation failed: {e}");
            return ExitCode::from(3);
        }
    };

    let report = Json::object()
        .with("experiment", Json::Str(experiment.name().to_string()))
        .with("version", Json::Str(env!("CARGO_PKG_VERSION").to_string()))
        .with("config_hash", Json::Str(format!("fnv1a64:{:016x}", fnv1a64(&raw))))
        .with("seed", Json::UInt(experiment.seed()))
        .with("config", canonical(&value))
        .with("results", output.results);

    let base = experiment
        .output_basename()
        .map(str::to_string)
        .unwrap_or_else(|| {
            run_args
                .config_path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "experiment".to_string())
        });
    if let Err(e) = std::fs::create_dir_all(&run_args.output_dir) {
        eprintln!("cannot create output dir: {e}");
        return ExitCode::from(3);
    }
    let report_path = run_args.output_dir.join(format!("{base}.report.json"));
    let mut rendered = report.render();
    rendered.push('\n');
    if let Err(e) = std::fs::write(&report_path, rendered) {
        eprintln!("cannot write report: {e}");
        return ExitCode::from(3);
    }
    for (suffix, contents) in &output.data_files {
        let path = run_args.output_dir.join(format!("{base}.{suffix}"));
        if let Err(e) = std::fs::write(&path, contents) {
            eprintln!("cannot write {}: {e}", path.display());
            return ExitCode::from(3);
        }
    }

    print!("{}", output.summary);
    println!("report: {}", display_path(&report_path));
    for (suffix, _) in &output.data_files {
        println!("data:   {}", display_path(&run_args.output_dir.join(format!("{base}.{suffix}"))));
    }
    ExitCode::SUCCESS
}

fn display_path(p: &Path) -> String {
    p.display().to_string()
}

/// Canonical rendering of an arbitrary JSON value: object keys sorted
/// (serde_json's default map already is), floats under the 17-digit policy.
fn canonical(v: &serde_json::Value) -> Json {
    match v {
        serde_json::Value::Null => Json::Null,
        serde_json::Value::Bool(b) => Json::Bool(*b),
        serde_json::Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                Json::Int(i)
            } else if let Some(u) = n.as_u64() {
                Json::UInt(u)
            } else {
                Json::Float(n.as_f64().unwrap_or(f64::NAN))
            }
        }
        serde_json::Value::String(s) => Json::Str(s.clone()),
        serde_json::Value::Array(items) => Json::Array(items.iter().map(canonical).collect()),
        serde_json::Value::Object(map) => {
            let mut obj = Json::object();
            for (k, val) in map {
                obj.push(k, canonical(val));
            }
            obj
        }
    }
}

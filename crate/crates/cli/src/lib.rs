//! `finsler` command-line front end.
//!
//! Every subcommand reads a JSON config, scans its points in parallel and
//! writes a JSON report (plus CSV on request). Exit code 0 means every check
//! passed, 1 a tolerance failure, 2 a config or I/O error.

pub mod commands;
pub mod config;
pub mod points;

use std::ffi::OsString;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, ValueEnum};
use finsler::geodesics::Trajectory;
use serde::Serialize;
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

use crate::commands::{Context, Outcome};
use crate::config::{Config, Format};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_ERROR: i32 = 2;

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    /// Curvature tensors and the Ricci scalar at each point.
    Curvature,
    /// Field equation residual at each point.
    Fieldeq,
    /// Causal class of each vector, with an optional cone convexity probe.
    Classify,
    /// Killing residual of `vector_field`.
    Killing,
    /// Frobenius residual of the dual one-form of `vector_field`.
    Static,
    /// Berwald test at each base point.
    Berwald,
    /// Averaged metric, its Christoffel symbols and Ricci tensor.
    Average,
    /// Integrate one geodesic.
    Geodesic,
    /// Berwald base, R = 0, field equation and Ric(h) = 0 on a static product.
    Verify,
}

#[derive(Debug, Parser)]
#[command(name = "finsler", version, about = "Numerical Lorentz-Finsler geometry scans")]
pub struct Cli {
    #[arg(value_enum)]
    pub command: Command,
    /// JSON config file.
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads; defaults to all cores.
    #[arg(long)]
    pub threads: Option<usize>,
    /// Geodesic step, also the finite-difference step of `average`.
    #[arg(long)]
    pub step: Option<f64>,
    /// Overrides `y_sampling.seed`.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Serialize)]
pub struct Report {
    pub config_hash: String,
    pub command: Command,
    pub summary: Map<String, Value>,
    pub points: Vec<Value>,
}

/// Hex SHA-256 of the effective config serialized as JSON.
pub fn config_hash(cfg: &Config) -> String {
    let text = serde_json::to_string(cfg).expect("config serializes");
    hex::encode(Sha256::digest(text.as_bytes()))
}

/// Applies command-line overrides and re-validates.
pub fn effective_config(mut cfg: Config, step: Option<f64>, seed: Option<u64>) -> Result<Config, ConfigError> {
    if let Some(s) = seed {
        cfg.y_sampling.seed = s;
    }
    if let Some(h) = step {
        if !(h > 0.0) || !h.is_finite() {
            return Err(ConfigError(format!("--step must be positive, got {h}")));
        }
        if let Some(g) = cfg.geodesic.as_mut() {
            g.step = h;
        }
        cfg.average.fd_step = h;
    }
    Ok(cfg)
}

/// Runs one command in-process.
pub fn execute(command: Command, cfg: &Config, threads: Option<usize>) -> Result<(Report, Option<Trajectory>), ConfigError> {
    let spec = cfg.metric.to_spec().map_err(|e| ConfigError(e.to_string()))?;
    spec.validate().map_err(|e| ConfigError(e.to_string()))?;
    points::check_cone_filter(&spec, &cfg.y_sampling).map_err(ConfigError)?;
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        if n == 0 {
            return Err(ConfigError("--threads must be at least 1".into()));
        }
        pool = pool.num_threads(n);
    }
    let pool = pool.build().map_err(|e| ConfigError(e.to_string()))?;
    let ctx = Context { config: cfg, spec: &spec, pool: &pool };
    let outcome: Outcome = match command {
        Command::Curvature => commands::curvature(&ctx),
        Command::Fieldeq => commands::fieldeq(&ctx),
        Command::Classify => commands::classify(&ctx),
        Command::Killing => commands::killing(&ctx)?,
        Command::Static => commands::static_check(&ctx)?,
        Command::Berwald => commands::berwald(&ctx),
        Command::Average => commands::average(&ctx)?,
        Command::Geodesic => commands::geodesic(&ctx)?,
        Command::Verify => commands::verify(&ctx)?,
    };
    let mut summary = Map::new();
    summary.insert("tool_version".into(), Value::from(env!("CARGO_PKG_VERSION")));
    summary.insert("metric_family".into(), Value::from(spec.family()));
    summary.insert("passed".into(), Value::from(outcome.passed));
    summary.insert("points".into(), Value::from(outcome.points.len()));
    summary.extend(outcome.summary);
    let report = Report { config_hash: config_hash(cfg), command, summary, points: outcome.points };
    Ok((report, outcome.trajectory))
}

fn scalar_cell(v: &Value) -> Option<String> {
    match v {
        Value::Number(n) => Some(n.to_string()),
        Value::Bool(b) => Some(b.to_string()),
        Value::String(s) => Some(s.clone()),
        Value::Null => Some(String::new()),
        _ => None,
    }
}

/// One row per point; arrays of numbers spread into `key0, key1, ...`, nested objects are dropped.
pub fn points_csv(points: &[Value]) -> Result<String, csv::Error> {
    let rows: Vec<Vec<(String, String)>> = points
        .iter()
        .map(|p| {
            let mut row = Vec::new();
            if let Value::Object(m) = p {
                for (k, v) in m {
                    if let Some(c) = scalar_cell(v) {
                        row.push((k.clone(), c));
                    } else if let Value::Array(a) = v {
                        if a.iter().all(Value::is_number) {
                            for (i, e) in a.iter().enumerate() {
                                row.push((format!("{k}{i}"), e.to_string()));
                            }
                        }
                    }
                }
            }
            row
        })
        .collect();
    let mut header: Vec<String> = Vec::new();
    for r in &rows {
        for (k, _) in r {
            if !header.contains(k) {
                header.push(k.clone());
            }
        }
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(&header)?;
    for r in &rows {
        w.write_record(header.iter().map(|h| r.iter().find(|(k, _)| k == h).map_or("", |(_, v)| v.as_str())))?;
    }
    Ok(String::from_utf8(w.into_inner().map_err(|e| e.into_error())?).expect("utf-8"))
}

pub fn trajectory_csv(t: &Trajectory) -> Result<String, csv::Error> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(t.csv_header())?;
    for row in t.csv_rows() {
        w.write_record(row.iter().map(|v| format!("{v:e}")))?;
    }
    Ok(String::from_utf8(w.into_inner().map_err(|e| e.into_error())?).expect("utf-8"))
}

fn output_base(cfg: &Config, command: Command, out: Option<&Path>) -> Option<PathBuf> {
    let default_name = || {
        let v = serde_json::to_value(command).expect("command serializes");
        PathBuf::from(v.as_str().unwrap_or("report"))
    };
    match (out, &cfg.output.path) {
        (Some(dir), Some(p)) => Some(dir.join(p)),
        (Some(dir), None) => Some(dir.join(default_name())),
        (None, Some(p)) => Some(p.clone()),
        (None, None) => None,
    }
}

fn write_outputs(cli: &Cli, cfg: &Config, report: &Report, traj: Option<&Trajectory>) -> Result<(), ConfigError> {
    let io = |p: &Path, e: &dyn fmt::Display| ConfigError(format!("{}: {e}", p.display()));
    let json = serde_json::to_string_pretty(report).expect("report serializes");
    let Some(base) = output_base(cfg, cli.command, cli.out.as_deref()) else {
        println!("{json}");
        return Ok(());
    };
    if let Some(parent) = base.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| io(parent, &e))?;
    }
    let json_path = base.with_extension("json");
    fs::write(&json_path, json + "\n").map_err(|e| io(&json_path, &e))?;
    let csv = match traj {
        Some(t) => Some(trajectory_csv(t)),
        None if cfg.output.format == Format::Csv => Some(points_csv(&report.points)),
        None => None,
    };
    if let Some(csv) = csv {
        let csv_path = base.with_extension("csv");
        let text = csv.map_err(|e| io(&csv_path, &e))?;
        fs::write(&csv_path, text).map_err(|e| io(&csv_path, &e))?;
    }
    Ok(())
}

fn run_parsed(cli: &Cli) -> Result<bool, ConfigError> {
    let text = fs::read_to_string(&cli.config).map_err(|e| ConfigError(format!("{}: {e}", cli.config.display())))?;
    let cfg = Config::from_json(&text).map_err(|e| ConfigError(format!("{}: {e}", cli.config.display())))?;
    let cfg = effective_config(cfg, cli.step, cli.seed)?;
    let (report, traj) = execute(cli.command, &cfg, cli.threads)?;
    write_outputs(cli, &cfg, &report, traj.as_ref())?;
    Ok(report.summary["passed"] == Value::Bool(true))
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { EXIT_PASS };
            let _ = e.print();
            return code;
        }
    };
    match run_parsed(&cli) {
        Ok(true) => EXIT_PASS,
        Ok(false) => {
            let name = serde_json::to_value(cli.command).expect("command serializes");
            eprintln!("finsler {}: tolerance check failed", name.as_str().unwrap_or_default());
            EXIT_FAIL
        }
        Err(e) => {
            eprintln!("finsler: {e}");
            EXIT_ERROR
        }
    }
}

//! Experiment runner: JSON configs in, `<prefix>.report.json` and
//! `<prefix>.data.csv` out.
//!
//! Exit codes: 0 all verdicts pass, 1 a verdict failed (or no verdict could
//! be reached), 2 configuration error, 3 assumptions failed without
//! `--waive-assumptions`.

pub mod config;
pub mod experiments;
pub mod reference;

use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde_json::json;
use thiserror::Error;

use perturbwalk_core::rng::RNG_ALGORITHM;
use perturbwalk_core::walk::{check_assumptions, write_path, AssumptionReport};

pub use config::{Experiment, ExperimentConfig};
pub use experiments::{execute, Outcome};

pub const THREADS_ENV: &str = "PERTURBWALK_THREADS";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("assumptions not met: {}", .0.join(", "))]
    Assumptions(Vec<&'static str>),
    #[error("{0}")]
    Runtime(String),
    #[error("io error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Runtime(_) => 1,
            CliError::Config(_) | CliError::Io(_) => 2,
            CliError::Assumptions(_) => 3,
        }
    }
}

pub(crate) fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    std::fs::write(path, bytes).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub waive_assumptions: bool,
    pub threads: usize,
    pub out: Option<String>,
}

#[derive(Debug)]
pub struct RunResult {
    pub outcome: Outcome,
    pub report_path: PathBuf,
    pub data_path: PathBuf,
}

/// `--threads`, else `PERTURBWALK_THREADS`, else 0 (all cores). Results do
/// not depend on it.
pub fn resolve_threads(flag: Option<usize>) -> Result<usize, CliError> {
    if let Some(t) = flag {
        return Ok(t);
    }
    match std::env::var(THREADS_ENV) {
        Ok(v) => v.trim().parse().map_err(|_| CliError::Config(format!("{THREADS_ENV}={v:?} is not a thread count"))),
        Err(_) => Ok(0),
    }
}

fn output_prefix(cfg: &ExperimentConfig, config_path: &Path, opts: &RunOptions) -> String {
    opts.out
        .clone()
        .or_else(|| cfg.output.clone())
        .unwrap_or_else(|| config_path.with_extension("").to_string_lossy().into_owned())
}

/// Runs the gate; a failure is an error unless waived.
pub fn gate(cfg: &ExperimentConfig, waive: bool) -> Result<Option<AssumptionReport>, CliError> {
    if !cfg.experiment.gated() {
        return Ok(None);
    }
    let spec = cfg.walk.build(cfg.seed()).map_err(|e| CliError::Config(e.to_string()))?;
    let rep = check_assumptions(&spec);
    if !rep.passed() && !waive {
        return Err(CliError::Assumptions(rep.failures()));
    }
    Ok(Some(rep))
}

pub fn run(config_path: &Path, opts: &RunOptions) -> Result<RunResult, CliError> {
    let cfg = ExperimentConfig::load(config_path)?;
    let assumptions = gate(&cfg, opts.waive_assumptions)?;
    let outcome = execute(&cfg, opts.threads)?;
    let prefix = output_prefix(&cfg, config_path, opts);
    let report_path = PathBuf::from(format!("{prefix}.report.json"));
    let data_path = PathBuf::from(format!("{prefix}.data.csv"));
    if let Some(dir) = report_path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    }

    let generated = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    let report = json!({
        "experiment": cfg.experiment,
        "passed": outcome.passed(),
        "verdicts": outcome.verdicts,
        "results": outcome.results,
        "assumptions": assumptions,
        "assumptions_waived": opts.waive_assumptions,
        "config": cfg,
        "thresholds": cfg.thresholds,
        "version": env!("CARGO_PKG_VERSION"),
        "rng": RNG_ALGORITHM,
        "threads": opts.threads,
        "generated_unix": generated,
    });
    let text = serde_json::to_string_pretty(&report).expect("report serializes");
    write_file(&report_path, text.as_bytes())?;
    write_file(&data_path, outcome.csv.as_bytes())?;
    if let Some(path) = &outcome.path {
        let mut buf = Vec::new();
        write_path(&mut buf, path).map_err(|e| CliError::Runtime(e.to_string()))?;
        write_file(Path::new(&format!("{prefix}.path.pwlk")), &buf)?;
    }
    Ok(RunResult { outcome, report_path, data_path })
}

/// Assumption report for `perturbwalk check`; exit 3 when it fails.
pub fn check(config_path: &Path) -> Result<AssumptionReport, CliError> {
    let cfg = ExperimentConfig::load(config_path)?;
    let spec = cfg.walk.build(cfg.seed()).map_err(|e| CliError::Config(e.to_string()))?;
    Ok(check_assumptions(&spec))
}

//! Batch runner for `gaudin-core` experiments: JSON configs in, a JSON report
//! and CSV spectra out, with deterministic replay.

pub mod config;
pub mod replay;
pub mod runner;

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use serde_json::json;

use config::{parse_config, validate_all, ConfigFile, Overrides, SCHEMA_VERSION};
use runner::{run_experiment, ExperimentReport, Verdict};

pub const TOOL: &str = "gaudin-lab";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Exit code for configuration and usage errors.
pub const EXIT_USAGE: i32 = 1;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunReport {
    pub tool: String,
    pub version: String,
    pub schema_version: u32,
    /// Effective config: overrides folded in, names and seeds filled.
    pub config: ConfigFile,
    pub overrides: Overrides,
    pub seed: u64,
    pub threads: usize,
    pub verdict: Verdict,
    pub experiments: Vec<ExperimentReport>,
    pub timing_ms: u64,
}

impl RunReport {
    pub fn exit_code(&self) -> i32 {
        self.verdict.exit_code()
    }
}

/// Validate everything, then run each experiment in order.
pub fn execute(file: &ConfigFile, overrides: &Overrides) -> Result<RunReport, String> {
    let effective = file.effective(overrides);
    let plans = validate_all(&effective)?;
    let start = Instant::now();
    let mut experiments = Vec::with_capacity(plans.len());
    for p in &plans {
        experiments.push(run_experiment(p).map_err(|e| e.0)?);
    }
    Ok(RunReport {
        tool: TOOL.into(),
        version: VERSION.into(),
        schema_version: SCHEMA_VERSION,
        seed: effective.seed.unwrap_or(0),
        config: effective,
        overrides: overrides.clone(),
        threads: rayon::current_num_threads(),
        verdict: Verdict::combine(experiments.iter().map(|e| e.verdict)),
        experiments,
        timing_ms: start.elapsed().as_millis() as u64,
    })
}

fn spectra_name(single: bool, name: &str) -> String {
    if single {
        "spectra.csv".into()
    } else {
        let safe: String = name.chars().map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' }).collect();
        format!("spectra-{safe}.csv")
    }
}

fn write_spectra(path: &Path, rows: &[runner::SpectraRow]) -> Result<(), String> {
    let mut w = csv::Writer::from_path(path).map_err(|e| format!("{}: {e}", path.display()))?;
    for r in rows {
        w.serialize(r).map_err(|e| e.to_string())?;
    }
    w.flush().map_err(|e| e.to_string())
}

/// Write `report.json` and any spectra CSVs into `out`.
pub fn write_outputs(report: &mut RunReport, out: &Path) -> Result<PathBuf, String> {
    fs::create_dir_all(out).map_err(|e| format!("cannot create {}: {e}", out.display()))?;
    let single = report.experiments.len() == 1;
    for e in report.experiments.iter_mut() {
        if e.spectra.is_empty() {
            continue;
        }
        let name = spectra_name(single, &e.name);
        write_spectra(&out.join(&name), &e.spectra)?;
        e.spectra_file = Some(name);
    }
    let path = out.join("report.json");
    let text = serde_json::to_string_pretty(report).map_err(|e| e.to_string())?;
    fs::write(&path, text + "\n").map_err(|e| format!("cannot write {}: {e}", path.display()))?;
    Ok(path)
}

/// Machine-readable error record, written to `out/error.json` when possible.
pub fn error_record(kind: &str, message: &str) -> serde_json::Value {
    json!({ "tool": TOOL, "version": VERSION, "error": { "kind": kind, "message": message } })
}

fn report_error(out: Option<&Path>, kind: &str, message: &str) -> i32 {
    let rec = error_record(kind, message);
    eprintln!("{rec}");
    if let Some(dir) = out {
        if fs::create_dir_all(dir).is_ok() {
            let _ = fs::write(dir.join("error.json"), serde_json::to_string_pretty(&rec).unwrap_or_default() + "\n");
        }
    }
    EXIT_USAGE
}

/// The `run` subcommand; returns the process exit code.
pub fn run_command(config_path: &Path, out: &Path, overrides: &Overrides) -> i32 {
    let text = match fs::read_to_string(config_path) {
        Ok(t) => t,
        Err(e) => return report_error(Some(out), "config", &format!("cannot read {}: {e}", config_path.display())),
    };
    let file = match parse_config(&text) {
        Ok(f) => f,
        Err(e) => return report_error(Some(out), "config", &e),
    };
    let mut report = match execute(&file, overrides) {
        Ok(r) => r,
        Err(e) => return report_error(Some(out), "config", &e),
    };
    if let Err(e) = write_outputs(&mut report, out) {
        return report_error(None, "io", &e);
    }
    for e in &report.experiments {
        println!("{:<14} {:<32} {}", format!("{:?}", e.verdict).to_uppercase(), e.name, e.timing_ms);
    }
    println!("overall: {:?}", report.verdict);
    report.exit_code()
}

/// The `replay` subcommand; returns the process exit code.
pub fn replay_command(report_path: &Path) -> i32 {
    match replay::replay_file(report_path) {
        Ok(outcome) => {
            println!("{}", serde_json::to_string_pretty(&outcome).unwrap_or_default());
            if outcome.identical {
                0
            } else {
                2
            }
        }
        Err(e) => report_error(None, "replay", &e),
    }
}

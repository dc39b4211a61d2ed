//! Re-running a report's config and comparing the results.

use std::fs;
use std::path::Path;

use serde::Serialize;
use serde_json::Value;

use crate::{execute, RunReport};

/// Relative tolerance for numeric table entries.
pub const TABLE_REL_TOL: f64 = 1e-12;

#[derive(Clone, Debug, Serialize)]
pub struct ReplayOutcome {
    pub identical: bool,
    pub experiments: usize,
    pub mismatches: Vec<String>,
}

pub fn replay_file(path: &Path) -> Result<ReplayOutcome, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    let original: RunReport = serde_json::from_str(&text).map_err(|e| format!("not a report: {e}"))?;
    replay(&original)
}

/// Run the echoed config again; verdicts must match exactly and tables up to
/// [`TABLE_REL_TOL`]. Timings are ignored.
pub fn replay(original: &RunReport) -> Result<ReplayOutcome, String> {
    let again = execute(&original.config, &Default::default())?;
    let mut mismatches = Vec::new();
    if again.verdict != original.verdict {
        mismatches.push(format!("overall verdict {:?} vs {:?}", original.verdict, again.verdict));
    }
    if again.experiments.len() != original.experiments.len() {
        mismatches.push(format!("{} experiments vs {}", original.experiments.len(), again.experiments.len()));
    }
    for (a, b) in original.experiments.iter().zip(&again.experiments) {
        let at = |what: &str| format!("{}: {what}", a.name);
        if a.name != b.name || a.kind != b.kind {
            mismatches.push(at("experiment order or kind differs"));
            continue;
        }
        if a.verdict != b.verdict {
            mismatches.push(at(&format!("verdict {:?} vs {:?}", a.verdict, b.verdict)));
        }
        let names = |r: &crate::runner::ExperimentReport| r.checks.iter().map(|c| (c.name.clone(), c.verdict)).collect::<Vec<_>>();
        if names(a) != names(b) {
            mismatches.push(at("check verdicts differ"));
        }
        compare_values(&a.tables, &b.tables, &format!("{}.tables", a.name), &mut mismatches);
    }
    Ok(ReplayOutcome { identical: mismatches.is_empty(), experiments: original.experiments.len(), mismatches })
}

fn close(x: f64, y: f64) -> bool {
    x == y || (x - y).abs() <= TABLE_REL_TOL * x.abs().max(y.abs())
}

pub fn compare_values(a: &Value, b: &Value, path: &str, out: &mut Vec<String>) {
    match (a, b) {
        (Value::Number(x), Value::Number(y)) => {
            let (x, y) = (x.as_f64().unwrap_or(f64::NAN), y.as_f64().unwrap_or(f64::NAN));
            if !close(x, y) {
                out.push(format!("{path}: {x} vs {y}"));
            }
        }
        (Value::Array(x), Value::Array(y)) => {
            if x.len() != y.len() {
                out.push(format!("{path}: length {} vs {}", x.len(), y.len()));
                return;
            }
            for (i, (u, v)) in x.iter().zip(y).enumerate() {
                compare_values(u, v, &format!("{path}[{i}]"), out);
            }
        }
        (Value::Object(x), Value::Object(y)) => {
            for (k, u) in x {
                match y.get(k) {
                    Some(v) => compare_values(u, v, &format!("{path}.{k}"), out),
                    None => out.push(format!("{path}.{k}: missing on replay")),
                }
            }
            for k in y.keys().filter(|k| !x.contains_key(*k)) {
                out.push(format!("{path}.{k}: new on replay"));
            }
        }
        _ if a == b => {}
        _ => out.push(format!("{path}: {a} vs {b}")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn numeric_tolerance() {
        let mut out = vec![];
        compare_values(&json!({"a": [1.0, "x"], "b": null}), &json!({"a": [1.0 + 1e-15, "x"], "b": null}), "t", &mut out);
        assert!(out.is_empty());
        compare_values(&json!({"a": 1.0}), &json!({"a": 1.001}), "t", &mut out);
        compare_values(&json!({"a": "x"}), &json!({"a": "y"}), "t", &mut out);
        compare_values(&json!({"a": 1}), &json!({}), "t", &mut out);
        assert_eq!(out.len(), 3);
    }
}

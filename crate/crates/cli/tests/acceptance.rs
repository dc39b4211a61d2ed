//! Acceptance gate: runs every shipped config through the binary, checks the
//! criterion-specific numbers in its report, then replays each report.
//!
//! Runs without the libtest harness so the `PASS`/`FAIL` line for each
//! criterion is always printed. Exits nonzero if any criterion fails.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::Value;

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

struct Run {
    code: Option<i32>,
    report: Value,
    path: PathBuf,
}

fn run(config: &str, out: &Path) -> Run {
    let dir = out.join(config.trim_end_matches(".json"));
    let o = Command::new(env!("CARGO_BIN_EXE_gaudin-lab"))
        .arg("run")
        .arg("--config")
        .arg(configs().join(config))
        .arg("--out")
        .arg(&dir)
        .output()
        .unwrap();
    let path = dir.join("report.json");
    let report = fs::read_to_string(&path).ok().and_then(|t| serde_json::from_str(&t).ok()).unwrap_or(Value::Null);
    Run { code: o.status.code(), report, path }
}

fn experiments(r: &Run) -> Vec<&Value> {
    r.report["experiments"].as_array().map(|v| v.iter().collect()).unwrap_or_default()
}

fn check_passed(e: &Value, name: &str) -> bool {
    e["checks"].as_array().is_some_and(|cs| cs.iter().any(|c| c["name"] == name && c["verdict"] == "pass"))
}

fn num(v: &Value) -> f64 {
    v.as_f64().unwrap_or(f64::NAN)
}

/// `(ok, summary)` for one criterion.
type Verdict = (bool, String);

fn c1(r: &Run) -> Verdict {
    let es = experiments(r);
    let all_zero = es.iter().all(|e| e["tables"]["commute"]["max_norm"] == "0/1" && check_passed(e, "pairwise_commute"));
    let max_dim = es.iter().map(|e| e["tables"]["dim"].as_u64().unwrap_or(0)).max().unwrap_or(0);
    let ms = num(&r.report["timing_ms"]);
    let ok = r.code == Some(0) && es.len() == 24 && all_zero && max_dim == 216 && ms < 300_000.0;
    (ok, format!("{} instances, all commutators exactly 0: {all_zero}, largest dim {max_dim}, {:.1} s", es.len(), ms / 1000.0))
}

fn c2(r: &Run) -> Verdict {
    let es = experiments(r);
    let e = es.first().copied().unwrap_or(&Value::Null);
    let sum = check_passed(e, "quadratics_sum_to_zero");
    let affine = check_passed(e, "affine_span") && e["tables"]["affine"]["comparison"]["verdict"] == "equal";
    let ok = r.code == Some(0) && sum && affine && e["tables"]["sum_h_max_abs"] == 0.0;
    (ok, format!("sum H_i = 0: {sum}, span at z equals span at 2z+5: {affine}"))
}

fn c3(r: &Run) -> Verdict {
    let es = experiments(r);
    let ns: Vec<u64> = es.iter().map(|e| e["tables"]["n_sites"].as_u64().unwrap_or(0)).collect();
    let worst = es.iter().map(|e| num(&e["tables"]["rounding_error"])).fold(0.0, f64::max);
    let each = es.iter().all(|e| e["tables"]["passed"] == true && e["tables"]["multiplicity_one"] == true && e["tables"]["observed"] == e["tables"]["expected"]);
    let ok = r.code == Some(0) && ns == [2, 3, 4, 5] && each && worst < 1e-6;
    (ok, format!("n = {ns:?}, contents matched with multiplicity one: {each}, rounding residual {worst:.1e}"))
}

fn simplicity(e: &Value, dim: u64) -> (bool, String) {
    let t = &e["tables"];
    let trials = t["trials"].as_array().map_or(0, Vec::len);
    let dims_ok = t["trials"].as_array().is_some_and(|v| v.iter().all(|x| x["singular_dim"] == dim));
    let ok = trials == 20 && t["simple"] == 20 && dims_ok && num(&t["min_gap"]) > 0.0;
    (ok, format!("{} simple {}/{trials} (dim {dim}), min gap {:.3e}", e["name"].as_str().unwrap_or("?"), t["simple"], num(&t["min_gap"])))
}

fn c4(r: &Run) -> Verdict {
    let es = experiments(r);
    let (ok, msg) = es.first().map_or((false, "no report".into()), |e| simplicity(e, 6));
    (ok && r.code == Some(0), msg)
}

fn c5(r: &Run) -> Verdict {
    let es = experiments(r);
    if es.len() != 2 {
        return (false, "expected two experiments".into());
    }
    let (a, ma) = simplicity(es[0], 4);
    let (b, mb) = simplicity(es[1], 4);
    (a && b && r.code == Some(0), format!("{ma}; {mb}"))
}

fn c6(r: &Run) -> Verdict {
    let es = experiments(r);
    let e = es.first().copied().unwrap_or(&Value::Null);
    let s = &e["tables"]["sweep"];
    let slope = num(&s["slope"]);
    let monotone = s["monotone"] == true;
    let commutes = e["tables"]["limit_commute"]["max_norm"] == "0/1" && e["tables"]["limit_commute"]["all_commute"] == true;
    let ok = r.code == Some(0) && monotone && slope >= 0.8 && commutes && s["ambiguities"].as_array().is_some_and(Vec::is_empty);
    (ok, format!("monotone: {monotone}, log-log slope {slope:.4}, limit family commutes exactly: {commutes}"))
}

fn c7(r: &Run) -> Verdict {
    let es = experiments(r);
    let t = &es.first().copied().unwrap_or(&Value::Null)["tables"];
    let nonzero = t["nonzero_brackets"].as_u64();
    let fd = t["finite_differences"].as_array().map_or(0, Vec::len);
    let worst = num(&t["max_fd_error"]);
    let ok = r.code == Some(0) && nonzero == Some(0) && t["points"] == 10 && fd == 5 && worst <= 1e-6;
    (ok, format!("{} pairs at {} points, nonzero brackets {:?}, {fd} finite-difference checks, max error {worst:.1e}", t["pairs"], t["points"], nonzero))
}

fn c8(r: &Run) -> Verdict {
    let es = experiments(r);
    let each = es.iter().all(|e| {
        ["multidegree_bijection", "gaudin_in_qz_span", "qz_in_gaudin_span"].iter().all(|c| check_passed(e, c)) && e["tables"]["passed"] == true
    });
    let cases: Vec<String> = es.iter().map(|e| format!("M={} d={}", e["tables"]["m"], e["tables"]["d"])).collect();
    (r.code == Some(0) && es.len() == 4 && each, format!("{}: both inclusions exact: {each}", cases.join(", ")))
}

fn c9(r: &Run) -> Verdict {
    let es = experiments(r);
    let t = &es.first().copied().unwrap_or(&Value::Null)["tables"];
    let dist = num(&t["lattice"]["max_distance"]);
    let ok = r.code == Some(0) && t["passed"] == true && dist <= 1e-8 && t["bending_tuples"] == t["gt_tuples"];
    (ok, format!("{} vs {} joint eigenspaces, max projector distance {dist:.1e}", t["bending_tuples"], t["gt_tuples"]))
}

fn main() {
    let out = tempfile::tempdir().unwrap();
    let criteria: [(&str, fn(&Run) -> Verdict); 9] = [
        ("c01-commutativity.json", c1),
        ("c02-sum-and-affine.json", c2),
        ("c03-schur-weyl.json", c3),
        ("c04-simplicity-gl2.json", c4),
        ("c05-simplicity-higher.json", c5),
        ("c06-limit-sweep.json", c6),
        ("c07-bending-classical.json", c7),
        ("c08-duality.json", c8),
        ("c09-gt-match.json", c9),
    ];
    let mut lines = Vec::new();
    let mut reports = Vec::new();
    for (i, (cfg, judge)) in criteria.iter().enumerate() {
        let r = run(cfg, out.path());
        let (ok, msg) = judge(&r);
        lines.push((i + 1, ok, format!("{msg} (exit {:?})", r.code)));
        println!("criterion {:>2}: {} {}", i + 1, if ok { "PASS" } else { "FAIL" }, lines.last().unwrap().2);
        reports.push(r.path);
    }
    let mut replay_failures = Vec::new();
    for p in &reports {
        let o = Command::new(env!("CARGO_BIN_EXE_gaudin-lab")).arg("replay").arg(p).output().unwrap();
        if o.status.code() != Some(0) {
            replay_failures.push(format!("{}: exit {:?} {}", p.display(), o.status.code(), String::from_utf8_lossy(&o.stdout)));
        }
    }
    let ok10 = replay_failures.is_empty();
    let msg10 = if ok10 { format!("{} reports replayed with identical verdicts", reports.len()) } else { replay_failures.join("; ") };
    println!("criterion 10: {} {msg10}", if ok10 { "PASS" } else { "FAIL" });
    lines.push((10, ok10, msg10));
    let failed: Vec<usize> = lines.iter().filter(|l| !l.1).map(|l| l.0).collect();
    if !failed.is_empty() {
        eprintln!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}

//! Executes validated experiments and collects verdicts.

use std::time::Instant;

use gaudin_core::duality::{duality_check, gt_match_check, PolySpace};
use gaudin_core::gaudin::{extract_generators, gaudin_family, OperatorFamily, Provenance};
use gaudin_core::limits::{
    bending_functions, compare_spans, fd_poisson_bracket, gr_consistency, limit_sweep, poisson_bracket, predicted_limit_family, ClassicalFn,
    ClassicalPoint, DegenSchedule, SpanVerdict,
};
use gaudin_core::repspace::{standard_module, symmetric_tensor_space};
use gaudin_core::scalar::{format_rational, int, rational_to_f64};
use gaudin_core::speclab::{genericity_sample, joint_spectrum, restrict, SpectrumReport, SpectrumStatus};
use gaudin_core::symgroup::jm_spectrum_check;
use gaudin_core::{Error, LinOp, Rational, Scalar, SitePoints, TensorSpace};
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::config::{Kind, Plan, Precision, SpectrumSource, Validated};

/// Relative tolerance for float commutators, scaled by `dim · max|entry|²`.
pub const FLOAT_COMMUTE_REL: f64 = 1e-12;
/// Absolute agreement required between finite-difference and exact brackets.
pub const FD_TOL: f64 = 1e-6;
/// Step for the central differences (with one Richardson extrapolation).
pub const FD_STEP: f64 = 1e-4;

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq, Eq, PartialOrd, Ord)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Indeterminate,
    Fail,
}

impl Verdict {
    /// Fail dominates indeterminate, which dominates pass.
    pub fn combine(items: impl IntoIterator<Item = Verdict>) -> Verdict {
        items.into_iter().max().unwrap_or(Verdict::Pass)
    }

    pub fn from_bool(ok: bool) -> Verdict {
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }

    pub fn exit_code(self) -> i32 {
        match self {
            Verdict::Pass => 0,
            Verdict::Fail => 2,
            Verdict::Indeterminate => 3,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct Check {
    pub name: String,
    pub verdict: Verdict,
    pub detail: String,
}

fn check(name: &str, verdict: Verdict, detail: impl Into<String>) -> Check {
    Check { name: name.into(), verdict, detail: detail.into() }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct SpectraRow {
    pub tuple_index: usize,
    pub member_label: String,
    pub eigenvalue_re: f64,
    pub eigenvalue_im: f64,
    pub multiplicity: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub name: String,
    pub kind: Kind,
    pub precision: Precision,
    pub seed: u64,
    pub verdict: Verdict,
    pub checks: Vec<Check>,
    pub tables: Value,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spectra_file: Option<String>,
    pub timing_ms: u64,
    #[serde(skip)]
    pub spectra: Vec<SpectraRow>,
}

/// Result of an experiment body before timing and naming are attached.
struct Outcome {
    checks: Vec<Check>,
    tables: Value,
    spectra: Vec<SpectraRow>,
}

/// A run-time error that is not a verdict: bad input that slipped past
/// validation or an internal failure.
#[derive(Debug)]
pub struct UsageError(pub String);

/// Errors that answer the question being asked map to verdicts; the rest abort.
fn classify(e: Error) -> Result<(Verdict, String), UsageError> {
    match e {
        Error::NotCommuting(..) | Error::NotInvariant { .. } => Ok((Verdict::Fail, e.to_string())),
        Error::IllConditioned { .. } | Error::NonConvergence { .. } | Error::Residual { .. } | Error::TruncationUnstable { .. } => {
            Ok((Verdict::Indeterminate, e.to_string()))
        }
        other => Err(UsageError(other.to_string())),
    }
}

pub fn run_experiment(v: &Validated) -> Result<ExperimentReport, UsageError> {
    let start = Instant::now();
    let outcome = match v.precision {
        Precision::Exact => dispatch::<Rational>(v),
        Precision::F64 => dispatch::<f64>(v),
    };
    let outcome = match outcome {
        Ok(o) => o,
        Err(e) => {
            let (verdict, msg) = classify(e).map_err(|UsageError(m)| UsageError(format!("{}: {m}", v.name)))?;
            Outcome { checks: vec![check("computation", verdict, msg.clone())], tables: json!({ "error": msg }), spectra: vec![] }
        }
    };
    Ok(ExperimentReport {
        name: v.name.clone(),
        kind: v.kind,
        precision: v.precision,
        seed: v.seed,
        verdict: Verdict::combine(outcome.checks.iter().map(|c| c.verdict)),
        checks: outcome.checks,
        tables: outcome.tables,
        spectra_file: None,
        timing_ms: start.elapsed().as_millis() as u64,
        spectra: outcome.spectra,
    })
}

fn dispatch<T: Scalar>(v: &Validated) -> gaudin_core::Result<Outcome> {
    match &v.plan {
        Plan::CommuteCheck { n_lie, degrees, z, affine, trunc } => commute_check::<T>(*n_lie, degrees, z, affine.as_ref(), *trunc),
        Plan::Spectrum { n_lie, degrees, source: SpectrumSource::Points(z), trunc } => spectrum_at::<T>(*n_lie, degrees, z, *trunc, v.seed),
        Plan::Spectrum { n_lie, degrees, source: SpectrumSource::Trials(t), trunc } => genericity::<T>(*n_lie, degrees, *t, v.seed, *trunc),
        Plan::LimitSweep { n_lie, degrees, schedule, trunc } => sweep::<T>(*n_lie, degrees, schedule, *trunc),
        Plan::DualityCheck { n_lie, m, d, z } => duality(*n_lie, *m, *d, z),
        Plan::GtMatch { n_lie, m, d } => gt_match(*n_lie, *m, *d, v.seed),
        Plan::BendingClassical { n_lie, n_sites, max_l, points, fd_checks, bound } => {
            bending_classical(*n_lie, *n_sites, *max_l, *points, *fd_checks, *bound, v.seed)
        }
        Plan::SchurWeyl { n_lie, n_sites } => schur_weyl(*n_lie, *n_sites, v.seed),
    }
}

fn to_value<S: Serialize>(s: &S) -> Value {
    serde_json::to_value(s).expect("report types serialize")
}

fn commute_tol<T: Scalar>(fam: &OperatorFamily<T>) -> f64 {
    if T::is_exact() {
        return 0.0;
    }
    let scale = fam.members().iter().map(|m| m.op.max_abs()).fold(1.0, f64::max);
    FLOAT_COMMUTE_REL * fam.dim().max(1) as f64 * scale * scale
}

fn op_is_zero<T: Scalar>(op: &LinOp<T>, tol: f64) -> bool {
    if T::is_exact() {
        op.is_zero()
    } else {
        op.max_abs() <= tol
    }
}

fn space_of<T: Scalar>(n_lie: usize, degrees: &[usize]) -> gaudin_core::Result<TensorSpace<T>> {
    Ok(symmetric_tensor_space(n_lie, degrees)?.to_field::<T>())
}

fn diagonal_generators<T: Scalar>(space: &TensorSpace<T>) -> OperatorFamily<T> {
    let n = space.n_lie();
    let mut f = OperatorFamily::new(space.dim());
    for a in 0..n {
        for b in 0..n {
            f.push(format!("E_{}{}", a + 1, b + 1), space.diag_gen(a, b), Provenance::Identity);
        }
    }
    f
}

fn commute_check<T: Scalar>(
    n_lie: usize,
    degrees: &[usize],
    z: &SitePoints,
    affine: Option<&(Rational, Rational)>,
    trunc: i32,
) -> gaudin_core::Result<Outcome> {
    let space = space_of::<T>(n_lie, degrees)?;
    let fam = gaudin_family(&space, z, trunc)?;
    let tol = commute_tol(&fam);
    let rep = fam.commute_report(tol)?;
    let mut checks = vec![check(
        "pairwise_commute",
        Verdict::from_bool(rep.all_commute),
        format!("{} members, {} pairs, max |[A,B]| = {}", rep.members, rep.pairs, rep.max_norm),
    )];
    let h_sum = fam
        .members()
        .iter()
        .filter(|m| matches!(m.provenance, Provenance::Quadratic { .. }))
        .try_fold(LinOp::zeros(space.dim()), |acc, m| acc.try_add(&m.op))?;
    let sum_zero = op_is_zero(&h_sum, tol);
    checks.push(check("quadratics_sum_to_zero", Verdict::from_bool(sum_zero), format!("max |sum H_i| = {:e}", h_sum.max_abs())));
    let diag = diagonal_generators(&space);
    let inv = fam.cross_commute_report(&diag, tol)?;
    checks.push(check(
        "diagonal_invariance",
        Verdict::from_bool(inv.all_commute),
        format!("max |[A,E_ab]| = {}", inv.max_norm),
    ));
    let mut tables = json!({
        "dim": space.dim(),
        "z": z.to_strings(),
        "trunc": trunc,
        "members": fam.labels(),
        "nonzero_members": fam.nonzero().len(),
        "commute": to_value(&rep),
        "diagonal_invariance": to_value(&inv),
        "sum_h_max_abs": h_sum.max_abs(),
    });
    if let Some((a, b)) = affine {
        let z2 = z.affine(a, b)?;
        let g1 = extract_generators(&space, z, trunc)?;
        let g2 = extract_generators(&space, &z2, trunc)?;
        let cmp = compare_spans(&g1, &g2, &[])?;
        checks.push(check(
            "affine_span",
            Verdict::from_bool(cmp.verdict == SpanVerdict::Equal),
            format!("span at z vs span at ({}) z + ({}): {:?}", format_rational(a), format_rational(b), cmp.verdict),
        ));
        tables["affine"] = json!({ "a": format_rational(a), "b": format_rational(b), "z_mapped": z2.to_strings(), "comparison": to_value(&cmp) });
    }
    Ok(Outcome { checks, tables, spectra: vec![] })
}

fn spectra_rows(rep: &SpectrumReport) -> Vec<SpectraRow> {
    rep.tuples
        .iter()
        .enumerate()
        .flat_map(|(i, t)| {
            rep.labels.iter().zip(&t.values).map(move |(l, v)| SpectraRow {
                tuple_index: i,
                member_label: l.clone(),
                eigenvalue_re: v[0],
                eigenvalue_im: v[1],
                multiplicity: t.multiplicity,
            })
        })
        .collect()
}

fn spectrum_verdict(rep: &SpectrumReport) -> Verdict {
    match rep.status {
        SpectrumStatus::Indeterminate => Verdict::Indeterminate,
        SpectrumStatus::Determinate => Verdict::from_bool(rep.simple),
    }
}

fn spectrum_at<T: Scalar>(n_lie: usize, degrees: &[usize], z: &SitePoints, trunc: i32, seed: u64) -> gaudin_core::Result<Outcome> {
    let exact = symmetric_tensor_space(n_lie, degrees)?;
    let sing = exact.singular_subspace();
    let space = exact.to_field::<T>();
    let basis: Vec<Vec<T>> = sing.vectors.iter().map(|v| v.iter().map(T::from_rational).collect()).collect();
    let fam = restrict(&gaudin_family(&space, z, trunc)?, &basis)?;
    let rep = joint_spectrum(&fam, seed)?;
    let verdict = spectrum_verdict(&rep);
    let detail = match &rep.reason {
        Some(r) => r.clone(),
        None => format!("{} tuples on a {}-dimensional singular subspace, min gap {:e}", rep.tuples.len(), rep.dim, rep.min_gap),
    };
    let tables = json!({ "singular_dim": sing.dim(), "z": z.to_strings(), "spectrum": to_value(&rep) });
    Ok(Outcome { checks: vec![check("simple_spectrum", verdict, detail)], tables, spectra: spectra_rows(&rep) })
}

fn genericity<T: Scalar>(n_lie: usize, degrees: &[usize], trials: usize, seed: u64, trunc: i32) -> gaudin_core::Result<Outcome> {
    let g = genericity_sample::<T>(n_lie, degrees, trials, seed, trunc)?;
    let verdict = if g.non_simple > 0 {
        Verdict::Fail
    } else if g.indeterminate > 0 {
        Verdict::Indeterminate
    } else {
        Verdict::Pass
    };
    let flagged: Vec<String> = g
        .trials
        .iter()
        .filter(|t| !t.simple)
        .map(|t| format!("seed {} z = ({}) {:?}", t.seed, t.z.join(", "), t.status))
        .collect();
    let detail = if flagged.is_empty() {
        format!("simple in {}/{} trials, min gap {:e}", g.simple, trials, g.min_gap)
    } else {
        format!("simple in {}/{} trials; not simple: {}", g.simple, trials, flagged.join("; "))
    };
    Ok(Outcome { checks: vec![check("simple_in_all_trials", verdict, detail)], tables: to_value(&g), spectra: vec![] })
}

fn sweep<T: Scalar>(n_lie: usize, degrees: &[usize], schedule: &DegenSchedule, trunc: i32) -> gaudin_core::Result<Outcome> {
    let space = space_of::<T>(n_lie, degrees)?;
    let rep = limit_sweep(&space, schedule, trunc)?;
    let predicted = predicted_limit_family(&space, schedule, trunc)?;
    let pc = predicted.commute_report(commute_tol(&predicted))?;
    let slope = rep.slope.map_or("n/a".to_string(), |s| format!("{s:.4}"));
    let checks = vec![
        check(
            "convergence",
            Verdict::from_bool(rep.passed),
            format!("log-log slope {slope}, monotone {}, {} ambiguities", rep.monotone, rep.ambiguities.len()),
        ),
        check("limit_family_commutes", Verdict::from_bool(pc.all_commute), format!("{} pairs, max |[A,B]| = {}", pc.pairs, pc.max_norm)),
    ];
    Ok(Outcome { checks, tables: json!({ "sweep": to_value(&rep), "limit_commute": to_value(&pc) }), spectra: vec![] })
}

fn duality(n_lie: usize, m: usize, d: usize, z: &SitePoints) -> gaudin_core::Result<Outcome> {
    let r = duality_check(&PolySpace::new(n_lie, m, d)?, z)?;
    let missing = |xs: &[gaudin_core::duality::Expansion]| xs.iter().filter(|e| !e.in_span).map(|e| e.target.clone()).collect::<Vec<_>>();
    let (a, b) = (missing(&r.gaudin_in_qz_span), missing(&r.qz_in_gaudin_span));
    let checks = vec![
        check("multidegree_bijection", Verdict::from_bool(r.bijection_exact), format!("{} components", r.components)),
        check("gaudin_in_qz_span", Verdict::from_bool(a.is_empty()), format!("outside span: {a:?}")),
        check("qz_in_gaudin_span", Verdict::from_bool(b.is_empty()), format!("outside span: {b:?}")),
    ];
    Ok(Outcome { checks, tables: to_value(&r), spectra: vec![] })
}

fn gt_match(n_lie: usize, m: usize, d: usize, seed: u64) -> gaudin_core::Result<Outcome> {
    let r = gt_match_check(&PolySpace::new(n_lie, m, d)?, seed)?;
    let verdict = if r.bending_status == SpectrumStatus::Indeterminate || r.gt_status == SpectrumStatus::Indeterminate {
        Verdict::Indeterminate
    } else {
        Verdict::from_bool(r.passed)
    };
    let detail = format!(
        "{} vs {} joint eigenspaces, max projector distance {:e}",
        r.bending_tuples, r.gt_tuples, r.lattice.max_distance
    );
    Ok(Outcome { checks: vec![check("eigenspace_lattice", verdict, detail)], tables: to_value(&r), spectra: vec![] })
}

fn describe(f: &ClassicalFn) -> String {
    match f {
        ClassicalFn::Bending { l, k, alpha } => format!("H({l},{},{alpha})", k + 1),
        ClassicalFn::Linear { site, .. } => format!("Tr(A X_{})", site + 1),
    }
}

fn bending_classical(n_lie: usize, n_sites: usize, max_l: usize, points: usize, fd_checks: usize, bound: i64, seed: u64) -> gaudin_core::Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pts: Vec<ClassicalPoint> = (0..points).map(|_| ClassicalPoint::random(n_lie, n_sites, bound, &mut rng)).collect();
    let fns = bending_functions(n_sites, max_l);
    let pairs: Vec<(usize, usize)> = (0..fns.len()).flat_map(|i| (i + 1..fns.len()).map(move |j| (i, j))).collect();
    let nonzero: Vec<Vec<(usize, usize)>> = pts
        .par_iter()
        .map(|p| {
            let mut bad = Vec::new();
            for &(i, j) in &pairs {
                if !poisson_bracket(&fns[i], &fns[j], p)?.is_zero() {
                    bad.push((i, j));
                }
            }
            Ok(bad)
        })
        .collect::<gaudin_core::Result<_>>()?;
    let n_bad: usize = nonzero.iter().map(Vec::len).sum();
    let mut checks = vec![check(
        "exact_brackets_vanish",
        Verdict::from_bool(n_bad == 0),
        format!("{} functions, {} pairs at {} points, {} nonzero", fns.len(), pairs.len(), points, n_bad),
    )];

    // finite differences: a random commuting pair per point, plus a control
    // bracket against a linear function that is not expected to vanish
    let mut fd_rows = Vec::new();
    let mut worst: f64 = 0.0;
    let mut control_ok = true;
    for p in pts.iter().take(fd_checks) {
        let (i, j) = pairs[rng.gen_range(0..pairs.len())];
        let exact = rational_to_f64(&poisson_bracket(&fns[i], &fns[j], p)?);
        let fd = fd_poisson_bracket(&fns[i], &fns[j], p, FD_STEP);
        worst = worst.max((fd - exact).abs());
        let site = rng.gen_range(0..n_sites);
        let a = LinOp::from_dense(n_lie, (0..n_lie * n_lie).map(|_| int(rng.gen_range(-3..=3))).collect());
        let lin = ClassicalFn::Linear { site, a };
        let f = &fns[rng.gen_range(0..fns.len())];
        let c_exact = rational_to_f64(&poisson_bracket(f, &lin, p)?);
        let c_fd = fd_poisson_bracket(f, &lin, p, FD_STEP);
        control_ok &= (c_fd - c_exact).abs() <= FD_TOL * (1.0 + c_exact.abs());
        fd_rows.push(json!({
            "f": describe(&fns[i]), "g": describe(&fns[j]), "exact": exact, "finite_difference": fd,
            "control": { "f": describe(f), "g": describe(&lin), "exact": c_exact, "finite_difference": c_fd },
        }));
    }
    if fd_checks > 0 {
        checks.push(check(
            "finite_difference_agreement",
            Verdict::from_bool(worst <= FD_TOL && control_ok),
            format!("{fd_checks} evaluations, max |fd - exact| = {worst:e}, control brackets agree: {control_ok}"),
        ));
    }

    // quadratic symbols of the two-site limit generators at every cut
    let gr_points: Vec<ClassicalPoint> = pts.iter().take(4).cloned().collect();
    let mut gr_rows = Vec::new();
    let mut gr_ok = true;
    if n_sites > 1 {
        for k in 0..n_sites - 1 {
            let rows = gr_consistency(&gr_points, k, &int(0), &int(1))?;
            gr_ok &= !rows.is_empty() && rows.iter().all(|r| r.passed);
            gr_rows.extend(rows.iter().map(to_value));
        }
        checks.push(check("quadratic_symbols_match", Verdict::from_bool(gr_ok), format!("{} symbol fits", gr_rows.len())));
    }
    let flagged: Vec<Value> = nonzero
        .iter()
        .enumerate()
        .flat_map(|(pi, v)| v.iter().map(move |&(i, j)| (pi, i, j)))
        .take(20)
        .map(|(pi, i, j)| json!({ "point": pi, "f": describe(&fns[i]), "g": describe(&fns[j]) }))
        .collect();
    let tables = json!({
        "functions": fns.iter().map(describe).collect::<Vec<_>>(),
        "pairs": pairs.len(),
        "points": points,
        "nonzero_brackets": n_bad,
        "nonzero_examples": flagged,
        "finite_differences": fd_rows,
        "max_fd_error": worst,
        "gr_consistency": gr_rows,
    });
    Ok(Outcome { checks, tables, spectra: vec![] })
}

fn schur_weyl(n_lie: usize, n_sites: usize, seed: u64) -> gaudin_core::Result<Outcome> {
    let space = TensorSpace::new(vec![standard_module(n_lie); n_sites])?;
    let r = jm_spectrum_check(&space, seed)?;
    let verdict = if r.status == SpectrumStatus::Indeterminate { Verdict::Indeterminate } else { Verdict::from_bool(r.passed) };
    let detail = format!(
        "{} tuples on a {}-dimensional singular subspace, {} expected, rounding error {:e}",
        r.observed.len(),
        r.singular_dim,
        r.expected.len(),
        r.rounding_error
    );
    let spectra = spectra_rows(&r.spectrum);
    Ok(Outcome { checks: vec![check("content_vectors", verdict, detail)], tables: to_value(&r), spectra })
}

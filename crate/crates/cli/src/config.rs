//! Experiment configs: parsing, overrides, and validation into runnable plans.

use gaudin_core::gaudin::default_trunc;
use gaudin_core::limits::DegenSchedule;
use gaudin_core::scalar::parse_rational;
use gaudin_core::{Rational, SitePoints};
use serde::{Deserialize, Serialize};
use serde_json::Value;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    CommuteCheck,
    Spectrum,
    LimitSweep,
    DualityCheck,
    GtMatch,
    BendingClassical,
    SchurWeyl,
}

impl Kind {
    pub fn as_str(self) -> &'static str {
        match self {
            Kind::CommuteCheck => "commute-check",
            Kind::Spectrum => "spectrum",
            Kind::LimitSweep => "limit-sweep",
            Kind::DualityCheck => "duality-check",
            Kind::GtMatch => "gt-match",
            Kind::BendingClassical => "bending-classical",
            Kind::SchurWeyl => "schur-weyl",
        }
    }

    fn supports_f64(self) -> bool {
        matches!(self, Kind::CommuteCheck | Kind::Spectrum | Kind::LimitSweep)
    }
}

#[derive(Clone, Copy, Debug, Default, Serialize, Deserialize, PartialEq, Eq, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Precision {
    #[default]
    Exact,
    F64,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ScheduleConfig {
    pub z_fixed: Vec<String>,
    pub z_center: String,
    pub u: Vec<String>,
    pub s_values: Vec<String>,
}

/// One experiment as written in a config file.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: Kind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(rename = "N", default, skip_serializing_if = "Option::is_none")]
    pub n_lie: Option<usize>,
    #[serde(rename = "n", default, skip_serializing_if = "Option::is_none")]
    pub n_sites: Option<usize>,
    #[serde(rename = "M", default, skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<usize>,
    /// Symmetric-power degrees `m_i`, one per site.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z: Option<Vec<String>>,
    /// `[a, b]`: also compare the generator span at `z` with the span at `a z + b`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub affine: Option<[String; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schedule: Option<ScheduleConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trials: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub precision: Option<Precision>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trunc: Option<i32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fd_checks: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_l: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bound: Option<i64>,
}

/// Normalized config file: always a list of experiments.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub schema_version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub experiments: Vec<ExperimentConfig>,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize, PartialEq)]
pub struct Overrides {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub precision: Option<Precision>,
}

impl Overrides {
    pub fn is_empty(&self) -> bool {
        self.seed.is_none() && self.precision.is_none()
    }
}

/// Accepts a single experiment object or `{"schema_version", "experiments": [...]}`.
pub fn parse_config(text: &str) -> Result<ConfigFile, String> {
    let value: Value = serde_json::from_str(text).map_err(|e| format!("invalid JSON: {e}"))?;
    let obj = value.as_object().ok_or("config must be a JSON object")?;
    let file = if obj.contains_key("experiments") {
        serde_json::from_value::<ConfigFile>(value).map_err(|e| format!("invalid config: {e}"))?
    } else {
        let mut v = value.clone();
        let version = v.as_object_mut().unwrap().remove("schema_version");
        let schema_version = match version {
            Some(x) => x.as_u64().ok_or("schema_version must be an integer")? as u32,
            None => SCHEMA_VERSION,
        };
        let exp: ExperimentConfig = serde_json::from_value(v).map_err(|e| format!("invalid config: {e}"))?;
        ConfigFile { schema_version, name: None, seed: None, experiments: vec![exp] }
    };
    if file.schema_version != SCHEMA_VERSION {
        return Err(format!("unsupported schema_version {} (expected {SCHEMA_VERSION})", file.schema_version));
    }
    if file.experiments.is_empty() {
        return Err("config lists no experiments".into());
    }
    Ok(file)
}

impl ConfigFile {
    /// Apply flag overrides and fill in names and seeds, so the result runs
    /// identically without any flags.
    pub fn effective(&self, overrides: &Overrides) -> ConfigFile {
        let mut out = self.clone();
        if let Some(s) = overrides.seed {
            out.seed = Some(s);
        }
        let base_seed = out.seed.unwrap_or(0);
        out.seed = Some(base_seed);
        for (i, e) in out.experiments.iter_mut().enumerate() {
            if e.name.is_none() {
                e.name = Some(format!("{}-{}", e.kind.as_str(), i + 1));
            }
            if overrides.seed.is_some() || e.seed.is_none() {
                e.seed = Some(base_seed);
            }
            if let Some(p) = overrides.precision {
                e.precision = Some(p);
            }
        }
        out
    }
}

/// A validated experiment.
#[derive(Clone, Debug)]
pub enum Plan {
    CommuteCheck { n_lie: usize, degrees: Vec<usize>, z: SitePoints, affine: Option<(Rational, Rational)>, trunc: i32 },
    Spectrum { n_lie: usize, degrees: Vec<usize>, source: SpectrumSource, trunc: i32 },
    LimitSweep { n_lie: usize, degrees: Vec<usize>, schedule: DegenSchedule, trunc: i32 },
    DualityCheck { n_lie: usize, m: usize, d: usize, z: SitePoints },
    GtMatch { n_lie: usize, m: usize, d: usize },
    BendingClassical { n_lie: usize, n_sites: usize, max_l: usize, points: usize, fd_checks: usize, bound: i64 },
    SchurWeyl { n_lie: usize, n_sites: usize },
}

#[derive(Clone, Debug)]
pub enum SpectrumSource {
    Points(SitePoints),
    Trials(usize),
}

#[derive(Clone, Debug)]
pub struct Validated {
    pub name: String,
    pub kind: Kind,
    pub seed: u64,
    pub precision: Precision,
    pub plan: Plan,
}

fn rationals(v: &[String]) -> Result<Vec<Rational>, String> {
    v.iter().map(|s| parse_rational(s).map_err(|e| e.to_string())).collect()
}

fn points(v: &[String]) -> Result<SitePoints, String> {
    SitePoints::new(rationals(v)?).map_err(|e| e.to_string())
}

/// Fields allowed for each kind besides `kind`, `name`, `seed`.
fn allowed(kind: Kind) -> &'static [&'static str] {
    match kind {
        Kind::CommuteCheck => &["N", "n", "weights", "z", "affine", "precision", "trunc"],
        Kind::Spectrum => &["N", "n", "weights", "z", "trials", "precision", "trunc"],
        Kind::LimitSweep => &["N", "n", "weights", "schedule", "precision", "trunc"],
        Kind::DualityCheck => &["N", "M", "d", "z"],
        Kind::GtMatch => &["N", "M", "d"],
        Kind::BendingClassical => &["N", "n", "max_l", "points", "fd_checks", "bound"],
        Kind::SchurWeyl => &["N", "n"],
    }
}

fn present_fields(e: &ExperimentConfig) -> Vec<&'static str> {
    let mut v = Vec::new();
    let mut add = |name, set: bool| {
        if set {
            v.push(name)
        }
    };
    add("N", e.n_lie.is_some());
    add("n", e.n_sites.is_some());
    add("M", e.m.is_some());
    add("d", e.d.is_some());
    add("weights", e.weights.is_some());
    add("z", e.z.is_some());
    add("affine", e.affine.is_some());
    add("schedule", e.schedule.is_some());
    add("trials", e.trials.is_some());
    add("precision", e.precision.is_some() && e.precision != Some(Precision::Exact));
    add("trunc", e.trunc.is_some());
    add("points", e.points.is_some());
    add("fd_checks", e.fd_checks.is_some());
    add("max_l", e.max_l.is_some());
    add("bound", e.bound.is_some());
    v
}

fn need<T: Copy>(x: Option<T>, field: &str) -> Result<T, String> {
    x.ok_or_else(|| format!("missing field {field}"))
}

fn degrees(e: &ExperimentConfig) -> Result<Vec<usize>, String> {
    match (&e.weights, e.n_sites) {
        (Some(w), Some(n)) if w.len() != n => Err(format!("weights has {} entries but n = {n}", w.len())),
        (Some(w), _) if w.is_empty() => Err("weights is empty".into()),
        (Some(w), _) => Ok(w.clone()),
        (None, Some(n)) if n > 0 => Ok(vec![1; n]),
        _ => Err("need n or weights".into()),
    }
}

fn trunc(e: &ExperimentConfig, n_lie: usize) -> Result<i32, String> {
    let t = e.trunc.unwrap_or_else(|| default_trunc(n_lie));
    if t < default_trunc(n_lie) {
        return Err(format!("trunc {t} below 2N = {}", default_trunc(n_lie)));
    }
    Ok(t)
}

fn positive(x: usize, field: &str) -> Result<usize, String> {
    if x == 0 {
        return Err(format!("{field} must be positive"));
    }
    Ok(x)
}

pub fn validate(e: &ExperimentConfig) -> Result<Validated, String> {
    let name = e.name.clone().unwrap_or_else(|| e.kind.as_str().to_string());
    let ctx = |m: String| format!("{name}: {m}");
    let extra: Vec<_> = present_fields(e).into_iter().filter(|f| !allowed(e.kind).contains(f)).collect();
    if !extra.is_empty() {
        return Err(ctx(format!("field(s) {} not used by kind {}", extra.join(", "), e.kind.as_str())));
    }
    let precision = e.precision.unwrap_or_default();
    if precision == Precision::F64 && !e.kind.supports_f64() {
        return Err(ctx(format!("kind {} runs in exact arithmetic only", e.kind.as_str())));
    }
    let n_lie = positive(need(e.n_lie, "N").map_err(ctx)?, "N").map_err(ctx)?;
    let plan = (|| -> Result<Plan, String> {
        Ok(match e.kind {
            Kind::CommuteCheck => {
                let degrees = degrees(e)?;
                let z = points(e.z.as_deref().ok_or("missing field z")?)?;
                if z.len() != degrees.len() {
                    return Err(format!("{} points for {} sites", z.len(), degrees.len()));
                }
                let affine = match &e.affine {
                    Some([a, b]) => {
                        let a = parse_rational(a).map_err(|e| e.to_string())?;
                        let b = parse_rational(b).map_err(|e| e.to_string())?;
                        z.affine(&a, &b).map_err(|e| e.to_string())?;
                        Some((a, b))
                    }
                    None => None,
                };
                Plan::CommuteCheck { n_lie, degrees, z, affine, trunc: trunc(e, n_lie)? }
            }
            Kind::Spectrum => {
                let degrees = degrees(e)?;
                let source = match (&e.z, e.trials) {
                    (Some(z), None) => {
                        let z = points(z)?;
                        if z.len() != degrees.len() {
                            return Err(format!("{} points for {} sites", z.len(), degrees.len()));
                        }
                        SpectrumSource::Points(z)
                    }
                    (None, Some(t)) => SpectrumSource::Trials(positive(t, "trials")?),
                    _ => return Err("give exactly one of z or trials".into()),
                };
                Plan::Spectrum { n_lie, degrees, source, trunc: trunc(e, n_lie)? }
            }
            Kind::LimitSweep => {
                let degrees = degrees(e)?;
                let s = e.schedule.as_ref().ok_or("missing field schedule")?;
                let schedule = DegenSchedule {
                    z_fixed: rationals(&s.z_fixed)?,
                    z_center: parse_rational(&s.z_center).map_err(|e| e.to_string())?,
                    u: rationals(&s.u)?,
                    s_values: rationals(&s.s_values)?,
                };
                schedule.validate().map_err(|e| e.to_string())?;
                if schedule.n() != degrees.len() {
                    return Err(format!("schedule has {} points for {} sites", schedule.n(), degrees.len()));
                }
                Plan::LimitSweep { n_lie, degrees, schedule, trunc: trunc(e, n_lie)? }
            }
            Kind::DualityCheck => {
                let m = positive(need(e.m, "M")?, "M")?;
                let z = points(e.z.as_deref().ok_or("missing field z")?)?;
                if z.len() != m {
                    return Err(format!("{} points for M = {m}", z.len()));
                }
                Plan::DualityCheck { n_lie, m, d: need(e.d, "d")?, z }
            }
            Kind::GtMatch => Plan::GtMatch { n_lie, m: positive(need(e.m, "M")?, "M")?, d: need(e.d, "d")? },
            Kind::BendingClassical => {
                let n_sites = positive(need(e.n_sites, "n")?, "n")?;
                let points = positive(e.points.unwrap_or(10), "points")?;
                let fd_checks = e.fd_checks.unwrap_or(5);
                if fd_checks > points {
                    return Err(format!("fd_checks {fd_checks} exceeds points {points}"));
                }
                let bound = e.bound.unwrap_or(10);
                if bound < 1 {
                    return Err("bound must be positive".into());
                }
                Plan::BendingClassical { n_lie, n_sites, max_l: positive(e.max_l.unwrap_or(3), "max_l")?, points, fd_checks, bound }
            }
            Kind::SchurWeyl => Plan::SchurWeyl { n_lie, n_sites: positive(need(e.n_sites, "n")?, "n")? },
        })
    })()
    .map_err(ctx)?;
    Ok(Validated { name, kind: e.kind, seed: e.seed.unwrap_or(0), precision, plan })
}

/// Validate every experiment before anything runs; names must be unique.
pub fn validate_all(file: &ConfigFile) -> Result<Vec<Validated>, String> {
    let plans: Vec<Validated> = file.experiments.iter().map(validate).collect::<Result<_, _>>()?;
    for (i, p) in plans.iter().enumerate() {
        if plans[..i].iter().any(|q| q.name == p.name) {
            return Err(format!("duplicate experiment name {}", p.name));
        }
    }
    Ok(plans)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_and_batch_forms() {
        let single = parse_config(r#"{"kind": "schur-weyl", "N": 3, "n": 3}"#).unwrap();
        assert_eq!(single.experiments.len(), 1);
        let batch = parse_config(r#"{"schema_version": 1, "experiments": [{"kind": "schur-weyl", "N": 2, "n": 2}, {"kind": "gt-match", "N": 2, "M": 2, "d": 2}]}"#).unwrap();
        assert_eq!(batch.experiments.len(), 2);
        assert!(validate_all(&batch).is_ok());
    }

    #[test]
    fn rejects_bad_configs() {
        assert!(parse_config(r#"{"kind": "nope"}"#).is_err());
        assert!(parse_config(r#"{"kind": "schur-weyl", "N": 3, "n": 3, "colour": 1}"#).is_err());
        assert!(parse_config(r#"{"schema_version": 7, "kind": "schur-weyl"}"#).is_err());
        let f = parse_config(r#"{"kind": "commute-check", "N": 2, "n": 3, "z": ["0", "1", "0"]}"#).unwrap();
        assert_eq!(validate_all(&f).unwrap_err(), "commute-check: sites not pairwise distinct");
        let f = parse_config(r#"{"kind": "schur-weyl", "N": 2, "n": 2, "z": ["0", "1"]}"#).unwrap();
        assert!(validate_all(&f).unwrap_err().contains("not used"));
        let f = parse_config(r#"{"kind": "gt-match", "N": 2, "M": 2, "d": 2, "precision": "f64"}"#).unwrap();
        assert!(validate_all(&f).is_err());
    }

    #[test]
    fn overrides_are_folded_in() {
        let f = parse_config(r#"{"kind": "commute-check", "N": 2, "n": 2, "z": ["0", "1"]}"#).unwrap();
        let e = f.effective(&Overrides { seed: Some(9), precision: Some(Precision::F64) });
        assert_eq!(e.seed, Some(9));
        assert_eq!(e.experiments[0].seed, Some(9));
        assert_eq!(e.experiments[0].precision, Some(Precision::F64));
        assert_eq!(e.experiments[0].name.as_deref(), Some("commute-check-1"));
        assert_eq!(e.effective(&Overrides::default()), e);
    }
}

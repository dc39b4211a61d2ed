use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gaudin::{gaudin_family, OperatorFamily, Provenance, SitePoints};
use crate::opcore::linop::LinOp;
use crate::repspace::{diag_composite, TensorSpace};
use crate::scalar::{format_rational, rational_to_f64, Rational, Scalar};

/// Distances below this count as converged and are left out of the
/// monotonicity check.
pub const DISTANCE_FLOOR: f64 = 1e-13;
/// Two predicted members this close to one perturbed member make the match ambiguous.
pub const AMBIGUITY_RADIUS: f64 = 1e-6;
pub const MIN_SLOPE: f64 = 0.8;

/// The last `n − k` points glue to `z_center` along directions `u` as `s → 0`.
#[derive(Clone, Debug)]
pub struct DegenSchedule {
    pub z_fixed: Vec<Rational>,
    pub z_center: Rational,
    pub u: Vec<Rational>,
    pub s_values: Vec<Rational>,
}

impl DegenSchedule {
    pub fn k(&self) -> usize {
        self.z_fixed.len()
    }

    pub fn n(&self) -> usize {
        self.z_fixed.len() + self.u.len()
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidSchedule(m.to_string()));
        if self.u.is_empty() {
            return bad("no glued points");
        }
        let mut fixed = self.z_fixed.clone();
        fixed.push(self.z_center.clone());
        if SitePoints::new(fixed).is_err() {
            return bad("fixed points and center not pairwise distinct");
        }
        if SitePoints::new(self.u.clone()).is_err() {
            return bad("u not pairwise distinct");
        }
        if self.s_values.is_empty() {
            return bad("no s values");
        }
        for w in self.s_values.windows(2) {
            if w[1] >= w[0] {
                return bad("s values must be strictly decreasing");
            }
        }
        for s in &self.s_values {
            if *s <= Rational::from_integer(0.into()) {
                return bad("s values must be positive");
            }
            if self.points(s).is_err() {
                return bad(&format!("points collide at s = {}", format_rational(s)));
            }
        }
        Ok(())
    }

    /// `(z_fixed, z_center + s u)`.
    pub fn points(&self, s: &Rational) -> Result<SitePoints> {
        let mut z = self.z_fixed.clone();
        z.extend(self.u.iter().map(|u| &self.z_center + s * u));
        SitePoints::new(z)
    }
}

fn lift_family<T: Scalar>(space: &TensorSpace<T>, first_site: usize, fam: &OperatorFamily<T>, tag: &str) -> Result<OperatorFamily<T>> {
    let mut out = OperatorFamily::new(space.dim());
    for m in fam.members() {
        let op = space.lift(first_site, &m.op)?;
        let provenance = Provenance::Lifted { first_site: first_site + 1, source: tag.to_string(), inner: Box::new(m.provenance.clone()) };
        out.push(format!("{tag}:{}", m.label), op, provenance);
    }
    Ok(out)
}

/// Space of the first `k` sites followed by one composite site for the rest.
/// It has the same basis as `space`.
pub fn glued_space<T: Scalar>(space: &TensorSpace<T>, k: usize) -> Result<TensorSpace<T>> {
    let mut factors: Vec<_> = space.factors()[..k].to_vec();
    factors.push(diag_composite(&space.factors()[k..])?);
    TensorSpace::new(factors)
}

/// (a) the Gaudin family of the glued space at `(z_fixed, z_center)`, and
/// (b) the Gaudin family of the glued sites alone at `u`, lifted by identity on
/// the fixed sites.
pub fn predicted_limit_family<T: Scalar>(space: &TensorSpace<T>, schedule: &DegenSchedule, trunc: i32) -> Result<OperatorFamily<T>> {
    schedule.validate()?;
    if schedule.n() != space.n_sites() {
        return Err(Error::InvalidSchedule(format!("schedule has {} points for {} sites", schedule.n(), space.n_sites())));
    }
    let k = schedule.k();
    let outer = glued_space(space, k)?;
    let mut za = schedule.z_fixed.clone();
    za.push(schedule.z_center.clone());
    let fam_a = gaudin_family(&outer, &SitePoints::new(za)?, trunc)?;
    let inner = TensorSpace::new(space.factors()[k..].to_vec())?;
    let fam_b = gaudin_family(&inner, &SitePoints::new(schedule.u.clone())?, trunc)?;
    let mut fam = lift_family(space, 0, &fam_a, "a")?;
    fam.extend(lift_family(space, k, &fam_b, "b")?);
    Ok(fam)
}

#[derive(Clone, Debug, Serialize)]
pub struct MemberTrack {
    pub label: String,
    /// Predicted member matched at each `s`.
    pub matched: Vec<String>,
    pub distances: Vec<f64>,
    pub monotone: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepReport {
    pub s_values: Vec<String>,
    pub members: Vec<MemberTrack>,
    pub max_distance: Vec<f64>,
    pub slope: Option<f64>,
    pub monotone: bool,
    pub ambiguities: Vec<String>,
    pub predicted_members: usize,
    pub passed: bool,
}

fn unit_vector<T: Scalar>(op: &LinOp<T>) -> Vec<num_complex::Complex64> {
    let d = op.dim();
    let mut v = vec![num_complex::Complex64::new(0.0, 0.0); d * d];
    for (r, c, x) in op.entries() {
        v[r * d + c] = x.to_c64();
    }
    let norm = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    v.iter_mut().for_each(|x| *x /= norm);
    v
}

/// `min(|a − b|, |a + b|)` for unit vectors.
pub fn projective_distance(a: &[num_complex::Complex64], b: &[num_complex::Complex64]) -> f64 {
    let (mut dm, mut dp) = (0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        dm += (x - y).norm_sqr();
        dp += (x + y).norm_sqr();
    }
    dm.min(dp).sqrt()
}

/// Least-squares slope of `log d` against `log s`.
pub fn loglog_slope(s: &[f64], d: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = s.iter().zip(d).filter(|(_, &d)| d > DISTANCE_FLOOR).map(|(s, d)| (s.ln(), d.ln())).collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Some(sxy / sxx)
}

/// Projective distance of every perturbed generator to its nearest predicted
/// member, for each `s`.
pub fn limit_sweep<T: Scalar>(space: &TensorSpace<T>, schedule: &DegenSchedule, trunc: i32) -> Result<SweepReport> {
    let predicted = predicted_limit_family(space, schedule, trunc)?.nonzero();
    let mut pred: Vec<(String, Vec<num_complex::Complex64>)> = Vec::new();
    for m in predicted.members() {
        let v = unit_vector(&m.op);
        if pred.iter().all(|(_, w)| projective_distance(&v, w) > 1e-9) {
            pred.push((m.label.clone(), v));
        }
    }
    let per_s: Vec<Result<OperatorFamily<T>>> = schedule
        .s_values
        .par_iter()
        .map(|s| Ok(gaudin_family(space, &schedule.points(s)?, trunc)?.nonzero()))
        .collect();
    let mut tracks: Vec<MemberTrack> = Vec::new();
    let mut ambiguities = Vec::new();
    for (si, fam) in per_s.into_iter().enumerate() {
        let fam = fam?;
        for m in fam.members() {
            let v = unit_vector(&m.op);
            let mut ds: Vec<(f64, &str)> = pred.iter().map(|(l, w)| (projective_distance(&v, w), l.as_str())).collect();
            ds.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
            if ds.len() > 1 && ds[1].0 <= AMBIGUITY_RADIUS {
                ambiguities.push(format!("{} at s#{si}: {} and {}", m.label, ds[0].1, ds[1].1));
            }
            let track = match tracks.iter_mut().find(|t| t.label == m.label) {
                Some(t) => t,
                None => {
                    tracks.push(MemberTrack { label: m.label.clone(), matched: vec![], distances: vec![], monotone: true });
                    tracks.last_mut().unwrap()
                }
            };
            track.matched.push(ds[0].1.to_string());
            track.distances.push(ds[0].0);
        }
    }
    let ns = schedule.s_values.len();
    for t in tracks.iter_mut() {
        t.monotone = t.distances.len() == ns && t.distances.windows(2).all(|w| w[1] < w[0] || w[0].max(w[1]) <= DISTANCE_FLOOR);
    }
    let max_distance: Vec<f64> = (0..ns).map(|i| tracks.iter().map(|t| t.distances.get(i).copied().unwrap_or(f64::INFINITY)).fold(0.0, f64::max)).collect();
    let s_f: Vec<f64> = schedule.s_values.iter().map(rational_to_f64).collect();
    let slope = loglog_slope(&s_f, &max_distance);
    let monotone = tracks.iter().all(|t| t.monotone);
    let converged = max_distance.iter().all(|&d| d <= DISTANCE_FLOOR);
    let passed = monotone && ambiguities.is_empty() && (converged || slope.is_some_and(|s| s >= MIN_SLOPE));
    Ok(SweepReport {
        s_values: schedule.s_values.iter().map(format_rational).collect(),
        members: tracks,
        max_distance,
        slope,
        monotone,
        ambiguities,
        predicted_members: pred.len(),
        passed,
    })
}

//! Joint spectra of commuting families on invariant subspaces.
//!
//! The joint spectrum is read from one random rational combination `g` of the
//! members: each cluster of `g`'s eigenvalues spans a joint invariant
//! subspace, and every member compressed to it must be scalar. If it is not,
//! the subspace is split further by that member's eigenvalues. A subspace that
//! cannot be made scalar for every member leaves the result indeterminate.

use nalgebra::DMatrix;
use num_complex::Complex64;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gaudin::{gaudin_family, OperatorFamily, SitePoints};
use crate::opcore::cluster::cluster;
use crate::opcore::eigen::{eigen_dense, to_complex_matrix};
use crate::opcore::kernel::rref;
use crate::opcore::linop::{LinOp, Row};
use crate::repspace::symmetric_tensor_space;
use crate::scalar::{format_rational, Rational, Scalar};

/// Relative tolerance for eigenvalue clusters and joint tuples.
pub const CLUSTER_TOL: f64 = 1e-8;
/// Relative commutator bound accepted for float families.
pub const FLOAT_COMMUTE_TOL: f64 = 1e-10;

/// The members restricted to `span(basis)`: `r × r` matrices in the
/// coordinates of `basis`. Invariance is verified exactly for exact fields.
pub fn restrict<T: Scalar>(family: &OperatorFamily<T>, basis: &[Vec<T>]) -> Result<OperatorFamily<T>> {
    let r = basis.len();
    let dim = family.dim();
    if basis.iter().any(|b| b.len() != dim) {
        return Err(Error::DimMismatch { left: dim, right: basis.iter().map(Vec::len).find(|&l| l != dim).unwrap_or(0) });
    }
    let solver = CoordinateSolver::new(basis)?;
    let mut out = OperatorFamily::new(r);
    for m in family.members() {
        let mut cols: Vec<Vec<T>> = Vec::with_capacity(r);
        for b in basis {
            let w = m.op.apply(b);
            match solver.solve(&w) {
                Some(c) => cols.push(c),
                None => {
                    let residual = solver.residual(&w);
                    return Err(Error::NotInvariant { member: m.label.clone(), residual });
                }
            }
        }
        let trip = (0..r).flat_map(|j| (0..r).map(move |i| (i, j))).map(|(i, j)| (i, j, cols[j][i].clone()));
        out.push(m.label.clone(), LinOp::from_triplets(r, trip), m.provenance.clone());
    }
    Ok(out)
}

/// Coordinates of vectors in the span of a fixed independent set.
enum CoordinateSolver<T: Scalar> {
    Exact { pivots: Vec<usize>, combos: Vec<Vec<Rational>>, basis: Vec<Vec<Rational>> },
    Float { basis: DMatrix<Complex64>, _marker: std::marker::PhantomData<T> },
}

impl<T: Scalar> CoordinateSolver<T> {
    fn new(basis: &[Vec<T>]) -> Result<Self> {
        let r = basis.len();
        if T::is_exact() {
            let qb: Vec<Vec<Rational>> = basis.iter().map(|b| b.iter().map(|x| x.exact_value().unwrap()).collect()).collect();
            let dim = qb.first().map_or(0, Vec::len);
            // rows [b_i | e_i]; after reduction each row is R_k | G_k with R = G B^T
            let rows: Vec<Row<Rational>> = qb
                .iter()
                .enumerate()
                .map(|(i, b)| {
                    let mut row: Row<Rational> = b.iter().enumerate().filter(|(_, x)| !x.is_zero()).map(|(c, x)| (c, x.clone())).collect();
                    row.push((dim + i, Rational::one()));
                    row
                })
                .collect();
            let ech = rref(dim + r, rows);
            if ech.pivots.iter().any(|&p| p >= dim) || ech.rank() != r {
                return Err(Error::InvalidArgument("restriction basis is linearly dependent".into()));
            }
            let combos = ech
                .rows
                .iter()
                .map(|row| {
                    let mut g = vec![Rational::zero(); r];
                    for (c, v) in row {
                        if *c >= dim {
                            g[c - dim] = v.clone();
                        }
                    }
                    g
                })
                .collect();
            Ok(CoordinateSolver::Exact { pivots: ech.pivots.clone(), combos, basis: qb })
        } else {
            let dim = basis.first().map_or(0, Vec::len);
            let m = DMatrix::from_fn(dim, r, |i, j| basis[j][i].to_c64());
            Ok(CoordinateSolver::Float { basis: m, _marker: std::marker::PhantomData })
        }
    }

    fn solve(&self, w: &[T]) -> Option<Vec<T>> {
        match self {
            CoordinateSolver::Exact { pivots, combos, basis } => {
                let wq: Vec<Rational> = w.iter().map(|x| x.exact_value().unwrap()).collect();
                let r = basis.len();
                let mut c = vec![Rational::zero(); r];
                for (k, &p) in pivots.iter().enumerate() {
                    if wq[p].is_zero() {
                        continue;
                    }
                    for i in 0..r {
                        if !combos[k][i].is_zero() {
                            c[i] += &wq[p] * &combos[k][i];
                        }
                    }
                }
                // exact verification
                for (pos, target) in wq.iter().enumerate() {
                    let mut acc = Rational::zero();
                    for i in 0..r {
                        if !c[i].is_zero() && !basis[i][pos].is_zero() {
                            acc += &c[i] * &basis[i][pos];
                        }
                    }
                    if &acc != target {
                        return None;
                    }
                }
                Some(c.iter().map(T::from_rational).collect())
            }
            CoordinateSolver::Float { basis, .. } => {
                let wv = nalgebra::DVector::from_iterator(w.len(), w.iter().map(|x| x.to_c64()));
                let x = basis.clone().svd(true, true).solve(&wv, 1e-12).ok()?;
                let res = (basis * &x - &wv).norm();
                if res > 1e-9 * wv.norm().max(1.0) {
                    return None;
                }
                x.iter().map(|c| T::from_c64(*c)).collect()
            }
        }
    }

    fn residual(&self, w: &[T]) -> f64 {
        let dim = w.len();
        let wv = nalgebra::DVector::from_iterator(dim, w.iter().map(|x| x.to_c64()));
        let b = match self {
            CoordinateSolver::Exact { basis, .. } => {
                DMatrix::from_fn(dim, basis.len(), |i, j| Complex64::new(crate::scalar::rational_to_f64(&basis[j][i]), 0.0))
            }
            CoordinateSolver::Float { basis, .. } => basis.clone(),
        };
        match b.clone().svd(true, true).solve(&wv, 1e-12) {
            Ok(x) => (b * x - &wv).norm(),
            Err(_) => wv.norm(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct JointTuple {
    /// One `[re, im]` pair per family member.
    pub values: Vec<[f64; 2]>,
    pub multiplicity: usize,
}

#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum SpectrumStatus {
    Determinate,
    Indeterminate,
}

#[derive(Clone, Debug, Serialize)]
pub struct SpectrumReport {
    pub labels: Vec<String>,
    pub dim: usize,
    pub tuples: Vec<JointTuple>,
    pub simple: bool,
    /// Smallest distance between distinct tuples (`inf` with fewer than two tuples).
    pub min_gap: f64,
    pub status: SpectrumStatus,
    pub reason: Option<String>,
    /// Condition estimate of the generic combination's eigenbasis.
    pub condition: f64,
    /// Largest `|f Q − Q F|` over members and leaf subspaces.
    pub invariance_residual: f64,
    /// Whether the eigenspace-splitting fallback was needed.
    pub used_fallback: bool,
    pub combination: Vec<String>,
    /// Orthonormal bases of the joint eigenspaces, aligned with `tuples`.
    #[serde(skip)]
    pub subspaces: Vec<DMatrix<Complex64>>,
}

fn orthonormal_columns(v: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let qr = v.clone().qr();
    let q = qr.q();
    q.columns(0, v.ncols()).into_owned()
}

fn scalar_part(f: &DMatrix<Complex64>) -> (Complex64, f64) {
    let k = f.nrows();
    let mean = f.trace() / k as f64;
    let dev = (f - DMatrix::<Complex64>::identity(k, k) * mean).norm();
    (mean, dev)
}

struct Splitter<'a> {
    members: &'a [DMatrix<Complex64>],
    scale: f64,
    leaves: Vec<(DMatrix<Complex64>, Vec<Complex64>)>,
    residual: f64,
    fallback: bool,
}

impl Splitter<'_> {
    fn split(&mut self, q: DMatrix<Complex64>, depth: usize) -> std::result::Result<(), String> {
        let mut comps = Vec::with_capacity(self.members.len());
        let mut first_bad: Option<usize> = None;
        for (i, f) in self.members.iter().enumerate() {
            let fq = f * &q;
            let fc = q.adjoint() * &fq;
            self.residual = self.residual.max((&fq - &q * &fc).norm() / self.scale);
            let (mean, dev) = scalar_part(&fc);
            if dev > CLUSTER_TOL * self.scale && first_bad.is_none() {
                first_bad = Some(i);
            }
            comps.push((mean, fc));
        }
        let Some(bad) = first_bad else {
            self.leaves.push((q, comps.into_iter().map(|c| c.0).collect()));
            return Ok(());
        };
        if depth > self.members.len() + 1 {
            return Err(format!("subspace of dimension {} does not split further", q.ncols()));
        }
        self.fallback = true;
        let fc = &comps[bad].1;
        let e = eigen_dense(fc).map_err(|e| format!("member {bad} on a {}-dim block: {e}", q.ncols()))?;
        let groups = cluster(&e.values, CLUSTER_TOL);
        if groups.len() == 1 {
            return Err(format!("member {bad} is not diagonalizable on a {}-dim joint block", q.ncols()));
        }
        for g in groups {
            let cols: Vec<_> = g.iter().map(|&i| e.vectors.column(i).into_owned()).collect();
            let sub = orthonormal_columns(&(&q * DMatrix::from_columns(&cols)));
            self.split(sub, depth + 1)?;
        }
        Ok(())
    }
}

fn random_rational(rng: &mut ChaCha8Rng, bound: i64) -> Rational {
    let mut p = 0;
    while p == 0 {
        p = rng.gen_range(-bound..=bound);
    }
    Rational::new(p.into(), rng.gen_range(1..=bound).into())
}

/// Joint eigenvalue tuples of a commuting family, in member order.
pub fn joint_spectrum<T: Scalar>(family: &OperatorFamily<T>, seed: u64) -> Result<SpectrumReport> {
    let dim = family.dim();
    let commute = family.commute_report(0.0)?;
    let mats: Vec<DMatrix<Complex64>> = family.members().iter().map(|m| to_complex_matrix(&m.op)).collect();
    let scale = mats.iter().map(|m| m.norm()).fold(1.0, f64::max);
    let commuting = if T::is_exact() { commute.all_commute } else { commute.max_norm_f64 <= FLOAT_COMMUTE_TOL * scale * scale };
    if !commuting {
        let (a, b) = commute.failures.first().cloned().unwrap_or_default();
        return Err(Error::NotCommuting(a, b));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let coeffs: Vec<Rational> = (0..mats.len()).map(|_| random_rational(&mut rng, 1000)).collect();
    let mut g = DMatrix::<Complex64>::zeros(dim, dim);
    for (c, m) in coeffs.iter().zip(&mats) {
        g += m * Complex64::new(crate::scalar::rational_to_f64(c), 0.0);
    }
    let labels = family.labels();
    let combination = coeffs.iter().map(format_rational).collect();
    let indeterminate = |reason: String, condition: f64| SpectrumReport {
        labels: labels.clone(),
        dim,
        tuples: vec![],
        simple: false,
        min_gap: f64::NAN,
        status: SpectrumStatus::Indeterminate,
        reason: Some(reason),
        condition,
        invariance_residual: f64::NAN,
        used_fallback: false,
        combination: coeffs.iter().map(format_rational).collect(),
        subspaces: vec![],
    };
    if dim == 0 {
        return Ok(SpectrumReport {
            labels,
            dim,
            tuples: vec![],
            simple: true,
            min_gap: f64::INFINITY,
            status: SpectrumStatus::Determinate,
            reason: None,
            condition: 1.0,
            invariance_residual: 0.0,
            used_fallback: false,
            combination,
            subspaces: vec![],
        });
    }
    let e = match eigen_dense(&g) {
        Ok(e) => e,
        Err(err) => return Ok(indeterminate(format!("generic combination: {err}"), f64::NAN)),
    };
    let mut splitter = Splitter { members: &mats, scale, leaves: vec![], residual: 0.0, fallback: false };
    for grp in cluster(&e.values, CLUSTER_TOL) {
        let cols: Vec<_> = grp.iter().map(|&i| e.vectors.column(i).into_owned()).collect();
        let q = orthonormal_columns(&DMatrix::from_columns(&cols));
        if let Err(reason) = splitter.split(q, 0) {
            return Ok(indeterminate(reason, e.condition));
        }
    }
    // merge leaves with equal tuples
    let mut merged: Vec<(Vec<Complex64>, Vec<DMatrix<Complex64>>)> = Vec::new();
    let tscale = splitter.leaves.iter().flat_map(|(_, t)| t.iter().map(|c| c.norm())).fold(1.0, f64::max);
    for (q, t) in splitter.leaves {
        match merged.iter_mut().find(|(u, _)| u.iter().zip(&t).all(|(a, b)| (a - b).norm() <= CLUSTER_TOL * tscale)) {
            Some((_, qs)) => qs.push(q),
            None => merged.push((t, vec![q])),
        }
    }
    let mut tuples = Vec::new();
    let mut subspaces = Vec::new();
    for (t, qs) in &merged {
        let cols: Vec<_> = qs.iter().flat_map(|q| q.column_iter().map(|c| c.into_owned()).collect::<Vec<_>>()).collect();
        let q = orthonormal_columns(&DMatrix::from_columns(&cols));
        tuples.push(JointTuple { values: t.iter().map(|c| [c.re, c.im]).collect(), multiplicity: q.ncols() });
        subspaces.push(q);
    }
    let mut min_gap = f64::INFINITY;
    for i in 0..merged.len() {
        for j in 0..i {
            let d = merged[i].0.iter().zip(&merged[j].0).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
            min_gap = min_gap.min(d);
        }
    }
    let total: usize = tuples.iter().map(|t| t.multiplicity).sum();
    debug_assert_eq!(total, dim);
    Ok(SpectrumReport {
        labels,
        dim,
        simple: tuples.iter().all(|t| t.multiplicity == 1),
        tuples,
        min_gap,
        status: SpectrumStatus::Determinate,
        reason: None,
        condition: e.condition,
        invariance_residual: splitter.residual,
        used_fallback: splitter.fallback,
        combination,
        subspaces,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct LatticeComparison {
    pub same: bool,
    /// Largest projector distance over matched pairs.
    pub max_distance: f64,
    /// `(side, index)` of a joint eigenspace with no partner on the other side.
    pub unmatched: Vec<(String, usize)>,
}

fn projector(q: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    q * q.adjoint()
}

/// Are the joint eigenspaces of two spectra the same subspaces?
pub fn compare_lattices(a: &SpectrumReport, b: &SpectrumReport, tol: f64) -> LatticeComparison {
    let pa: Vec<_> = a.subspaces.iter().map(projector).collect();
    let pb: Vec<_> = b.subspaces.iter().map(projector).collect();
    let mut max_distance: f64 = 0.0;
    let mut unmatched = Vec::new();
    let mut sweep = |xs: &[DMatrix<Complex64>], ys: &[DMatrix<Complex64>], side: &str| {
        for (i, p) in xs.iter().enumerate() {
            let best = ys.iter().filter(|q| q.shape() == p.shape()).map(|q| (p - q).norm()).fold(f64::INFINITY, f64::min);
            if best <= tol {
                max_distance = max_distance.max(best);
            } else {
                unmatched.push((side.to_string(), i));
            }
        }
    };
    sweep(&pa, &pb, "left");
    sweep(&pb, &pa, "right");
    LatticeComparison { same: unmatched.is_empty() && a.status == SpectrumStatus::Determinate && b.status == SpectrumStatus::Determinate, max_distance, unmatched }
}

#[derive(Clone, Debug, Serialize)]
pub struct TrialResult {
    pub seed: u64,
    pub z: Vec<String>,
    pub singular_dim: usize,
    pub simple: bool,
    pub status: SpectrumStatus,
    pub min_gap: f64,
    pub condition: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct GenericityReport {
    pub n_lie: usize,
    pub degrees: Vec<usize>,
    pub trials: Vec<TrialResult>,
    pub simple: usize,
    pub non_simple: usize,
    pub indeterminate: usize,
    pub min_gap: f64,
}

/// Points `p/q`, `|p|, q <= 1000`, pairwise distinct.
pub fn sample_points(n: usize, rng: &mut ChaCha8Rng) -> SitePoints {
    loop {
        let z: Vec<Rational> = (0..n).map(|_| Rational::new(rng.gen_range(-1000..=1000).into(), rng.gen_range(1..=1000).into())).collect();
        if let Ok(p) = SitePoints::new(z) {
            return p;
        }
    }
}

/// Gaudin family at random points, restricted to the singular subspace of
/// `⊗ S^{m_i} C^N`, and its joint spectrum; one trial per derived seed.
/// The family is built and restricted over `T`.
pub fn genericity_sample<T: Scalar>(n_lie: usize, degrees: &[usize], trials: usize, seed: u64, trunc: i32) -> Result<GenericityReport> {
    if trials == 0 {
        return Err(Error::InvalidArgument("need at least one trial".into()));
    }
    let exact_space = symmetric_tensor_space(n_lie, degrees)?;
    let sing = exact_space.singular_subspace();
    let space = exact_space.to_field::<T>();
    let basis: Vec<Vec<T>> = sing.vectors.iter().map(|v| v.iter().map(T::from_rational).collect()).collect();
    let results: Vec<Result<TrialResult>> = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let trial_seed = seed.wrapping_add(t);
            let mut rng = ChaCha8Rng::seed_from_u64(trial_seed);
            let z = sample_points(degrees.len(), &mut rng);
            let fam = gaudin_family(&space, &z, trunc)?;
            let restricted = restrict(&fam, &basis)?;
            let rep = joint_spectrum(&restricted, trial_seed)?;
            Ok(TrialResult {
                seed: trial_seed,
                z: z.to_strings(),
                singular_dim: sing.dim(),
                simple: rep.simple && rep.status == SpectrumStatus::Determinate,
                status: rep.status,
                min_gap: rep.min_gap,
                condition: rep.condition,
            })
        })
        .collect();
    let trials: Vec<TrialResult> = results.into_iter().collect::<Result<_>>()?;
    let simple = trials.iter().filter(|t| t.simple).count();
    let indeterminate = trials.iter().filter(|t| t.status == SpectrumStatus::Indeterminate).count();
    let min_gap = trials.iter().map(|t| t.min_gap).fold(f64::INFINITY, f64::min);
    Ok(GenericityReport {
        n_lie,
        degrees: degrees.to_vec(),
        non_simple: trials.len() - simple - indeterminate,
        simple,
        indeterminate,
        min_gap,
        trials,
    })
}

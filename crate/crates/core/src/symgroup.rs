//! Symmetric-group side of `(C^N)^{⊗n}`: transpositions, Jucys–Murphy
//! elements and standard Young tableaux contents.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::gaudin::{OperatorFamily, Provenance};
use crate::opcore::linop::LinOp;
use crate::repspace::TensorSpace;
use crate::scalar::{Rational, Scalar};
use crate::speclab::{joint_spectrum, restrict, SpectrumReport, SpectrumStatus};

fn require_standard<T: Scalar>(space: &TensorSpace<T>) -> Result<()> {
    match space.factors().iter().position(|f| !f.is_standard()) {
        Some(site) => Err(Error::NonStandardFactor(site + 1)),
        None => Ok(()),
    }
}

/// The permutation operator swapping tensor factors `i` and `j`.
pub fn transposition<T: Scalar>(space: &TensorSpace<T>, i: usize, j: usize) -> Result<LinOp<T>> {
    require_standard(space)?;
    space.check_site(i)?;
    space.check_site(j)?;
    if i == j {
        return Err(Error::InvalidArgument("transposition needs two distinct sites".into()));
    }
    let trip = (0..space.dim()).map(|x| {
        let mut d = space.decode(x);
        d.swap(i, j);
        (space.encode(&d), x, T::one())
    });
    Ok(LinOp::from_triplets(space.dim(), trip))
}

/// `X_i = Σ_{j<i} (j i)` for `i = 2..n` (1-based labels).
pub fn jm_elements<T: Scalar>(space: &TensorSpace<T>) -> Result<OperatorFamily<T>> {
    require_standard(space)?;
    let mut fam = OperatorFamily::new(space.dim());
    for i in 1..space.n_sites() {
        let mut x = LinOp::zeros(space.dim());
        for j in 0..i {
            x = x.try_add(&transposition(space, j, i)?)?;
        }
        fam.push(format!("X_{}", i + 1), x, Provenance::JucysMurphy { i: i + 1 });
    }
    Ok(fam)
}

/// Partitions of `n` with at most `max_rows` parts, in reverse lex order.
pub fn partitions(n: usize, max_rows: usize) -> Vec<Vec<usize>> {
    fn go(rest: usize, cap: usize, rows: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if rest == 0 {
            out.push(cur.clone());
            return;
        }
        if rows == 0 {
            return;
        }
        for p in (1..=cap.min(rest)).rev() {
            cur.push(p);
            go(rest - p, p, rows - 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(n, n, max_rows, &mut Vec::new(), &mut out);
    out
}

/// Content vectors `(c(2), …, c(n))` of all standard Young tableaux of
/// shape `partition`, where `c = column − row` of the box holding each entry.
pub fn syt_contents(partition: &[usize]) -> Vec<Vec<i64>> {
    fn go(shape: &[usize], filled: &mut Vec<usize>, cur: &mut Vec<i64>, out: &mut Vec<Vec<i64>>) {
        if filled.iter().zip(shape).all(|(f, s)| f == s) {
            out.push(cur[1..].to_vec());
            return;
        }
        for r in 0..shape.len() {
            let c = filled[r];
            if c < shape[r] && (r == 0 || filled[r - 1] > c) {
                filled[r] += 1;
                cur.push(c as i64 - r as i64);
                go(shape, filled, cur, out);
                cur.pop();
                filled[r] -= 1;
            }
        }
    }
    let shape: Vec<usize> = partition.iter().copied().filter(|&p| p > 0).collect();
    if shape.is_empty() {
        return vec![];
    }
    let mut out = Vec::new();
    go(&shape, &mut vec![0; shape.len()], &mut Vec::new(), &mut out);
    out.sort();
    out
}

#[derive(Clone, Debug, Serialize)]
pub struct JmCheck {
    pub n_lie: usize,
    pub n_sites: usize,
    pub singular_dim: usize,
    /// Integer tuples observed on the singular subspace, sorted.
    pub observed: Vec<Vec<i64>>,
    /// Content vectors of tableaux with at most `N` rows, sorted.
    pub expected: Vec<Vec<i64>>,
    /// Largest distance from a computed eigenvalue to its rounded integer.
    pub rounding_error: f64,
    pub multiplicity_one: bool,
    pub status: SpectrumStatus,
    pub passed: bool,
    /// The computed joint spectrum behind `observed`.
    #[serde(skip)]
    pub spectrum: SpectrumReport,
}

pub const ROUNDING_TOL: f64 = 1e-6;

/// Joint spectrum of the JM elements on the singular subspace, compared with
/// the content vectors of tableaux with at most `N` rows.
pub fn jm_spectrum_check(space: &TensorSpace<Rational>, seed: u64) -> Result<JmCheck> {
    let jm = jm_elements(space)?;
    let sing = space.singular_subspace();
    let restricted = restrict(&jm, &sing.vectors)?;
    let rep = joint_spectrum(&restricted, seed)?;
    let mut rounding_error: f64 = 0.0;
    let mut observed = Vec::new();
    for t in &rep.tuples {
        let v: Vec<i64> = t
            .values
            .iter()
            .map(|[re, im]| {
                let r = re.round();
                rounding_error = rounding_error.max((re - r).abs()).max(im.abs());
                r as i64
            })
            .collect();
        for _ in 0..t.multiplicity {
            observed.push(v.clone());
        }
    }
    observed.sort();
    let mut expected: Vec<Vec<i64>> = partitions(space.n_sites(), space.n_lie()).iter().flat_map(|p| syt_contents(p)).collect();
    expected.sort();
    let mut counts: BTreeMap<&Vec<i64>, usize> = BTreeMap::new();
    for v in &observed {
        *counts.entry(v).or_default() += 1;
    }
    let multiplicity_one = rep.simple && counts.values().all(|&c| c == 1);
    let passed = rep.status == SpectrumStatus::Determinate && rounding_error < ROUNDING_TOL && multiplicity_one && observed == expected;
    Ok(JmCheck {
        n_lie: space.n_lie(),
        n_sites: space.n_sites(),
        singular_dim: sing.dim(),
        observed,
        expected,
        rounding_error,
        multiplicity_one,
        status: rep.status.clone(),
        passed,
        spectrum: rep,
    })
}

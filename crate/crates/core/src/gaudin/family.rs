use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::opcore::linop::LinOp;
use crate::scalar::{format_rational, Rational, Scalar};

/// Where a family member comes from. Sites, poles and indices are 1-based here,
/// since these tags end up in reports.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Provenance {
    /// `H_i` of the quadratic family.
    Quadratic { site: usize },
    /// Coefficient of `u^{-m}` in the `∂^{N-l}` coefficient of `det(∂ − L)` at pole `i`.
    Laurent { pole: usize, l: usize, m: usize },
    /// `Tr E^l` for the diagonal action.
    DiagonalCasimir { l: usize },
    /// `Σ_{j>k} Ω^{(k,j)}`.
    Bending { k: usize },
    JucysMurphy { i: usize },
    Qz { index: usize },
    GtCasimir { k: usize, l: usize },
    /// Diagonal `E_aa` action, used as a linear correction term.
    Cartan { a: usize },
    Identity,
    /// A member of a family on sites `first_site..` lifted to a larger space.
    Lifted { first_site: usize, source: String, inner: Box<Provenance> },
}

#[derive(Clone, Debug)]
pub struct Member<T: Scalar> {
    pub label: String,
    pub op: LinOp<T>,
    pub provenance: Provenance,
}

#[derive(Clone, Debug)]
pub struct OperatorFamily<T: Scalar> {
    dim: usize,
    members: Vec<Member<T>>,
}

#[derive(Clone, Debug, Serialize)]
pub struct CommuteReport {
    pub members: usize,
    pub pairs: usize,
    /// Largest entry of any commutator, as `p/q` for exact families.
    pub max_norm: String,
    pub max_norm_f64: f64,
    pub failures: Vec<(String, String)>,
    pub all_commute: bool,
}

impl<T: Scalar> OperatorFamily<T> {
    pub fn new(dim: usize) -> Self {
        OperatorFamily { dim, members: Vec::new() }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn push(&mut self, label: impl Into<String>, op: LinOp<T>, provenance: Provenance) {
        assert_eq!(op.dim(), self.dim, "family member has the wrong dimension");
        self.members.push(Member { label: label.into(), op, provenance });
    }

    pub fn extend(&mut self, other: OperatorFamily<T>) {
        assert_eq!(other.dim, self.dim);
        self.members.extend(other.members);
    }

    pub fn members(&self) -> &[Member<T>] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn ops(&self) -> Vec<LinOp<T>> {
        self.members.iter().map(|m| m.op.clone()).collect()
    }

    pub fn labels(&self) -> Vec<String> {
        self.members.iter().map(|m| m.label.clone()).collect()
    }

    pub fn get(&self, label: &str) -> Option<&Member<T>> {
        self.members.iter().find(|m| m.label == label)
    }

    /// Members that are not the zero operator.
    pub fn nonzero(&self) -> Self {
        OperatorFamily { dim: self.dim, members: self.members.iter().filter(|m| !m.op.is_zero()).cloned().collect() }
    }

    /// Maps every member, keeping labels and provenance.
    pub fn map_ops<U: Scalar>(&self, dim: usize, f: impl Fn(&LinOp<T>) -> Result<LinOp<U>>) -> Result<OperatorFamily<U>> {
        let mut out = OperatorFamily::new(dim);
        for m in &self.members {
            out.push(m.label.clone(), f(&m.op)?, m.provenance.clone());
        }
        Ok(out)
    }

    /// All pairwise commutators. Exact families must give the zero matrix;
    /// float families are compared against `tol`.
    pub fn commute_report(&self, tol: f64) -> Result<CommuteReport> {
        commute_between(&self.members, &self.members, true, tol)
    }

    /// Commutators of every member here with every member of `other`.
    pub fn cross_commute_report(&self, other: &OperatorFamily<T>, tol: f64) -> Result<CommuteReport> {
        commute_between(&self.members, &other.members, false, tol)
    }
}

impl OperatorFamily<Rational> {
    pub fn to_field<U: Scalar>(&self) -> OperatorFamily<U> {
        self.map_ops(self.dim, |op| Ok(op.to_field())).unwrap()
    }
}

fn commute_between<T: Scalar>(a: &[Member<T>], b: &[Member<T>], triangle: bool, tol: f64) -> Result<CommuteReport> {
    let pairs: Vec<(usize, usize)> = (0..a.len())
        .flat_map(|i| (if triangle { i + 1 } else { 0 }..b.len()).map(move |j| (i, j)))
        .collect();
    let results: Vec<Result<(usize, usize, LinOp<T>)>> =
        pairs.par_iter().map(|&(i, j)| a[i].op.commutator(&b[j].op).map(|c| (i, j, c))).collect();
    let mut max_f = 0.0f64;
    let mut max_q: Option<Rational> = if T::is_exact() { Some(Rational::from_integer(0.into())) } else { None };
    let mut failures = Vec::new();
    for r in results {
        let (i, j, c) = r?;
        let m = c.max_abs();
        max_f = max_f.max(m);
        if let Some(q) = max_q.as_mut() {
            for (_, _, v) in c.entries() {
                let x = num_traits::Signed::abs(&v.exact_value().unwrap());
                if x > *q {
                    *q = x;
                }
            }
        }
        let bad = if T::is_exact() { !c.is_zero() } else { m > tol };
        if bad {
            failures.push((a[i].label.clone(), b[j].label.clone()));
        }
    }
    let max_norm = match &max_q {
        Some(q) => format_rational(q),
        None => format!("{max_f:e}"),
    };
    Ok(CommuteReport {
        members: a.len().max(b.len()),
        pairs: pairs.len(),
        max_norm,
        max_norm_f64: max_f,
        all_commute: failures.is_empty(),
        failures,
    })
}

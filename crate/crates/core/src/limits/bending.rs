use serde::Serialize;

use crate::error::{Error, Result};
use crate::gaudin::{diag_casimirs, extract_generators, split_casimir, OperatorFamily, Provenance, SitePoints};
use crate::opcore::linop::LinOp;
use crate::opcore::span::in_span;
use crate::repspace::TensorSpace;
use crate::scalar::{Rational, Scalar};

use super::sweep::glued_space;

/// `M_k = Σ_{j>k} Ω^{(k,j)}` for `k = 1..n−1`, then the diagonal `Tr E²`.
pub fn bending_quadratic_family<T: Scalar>(space: &TensorSpace<T>) -> Result<OperatorFamily<T>> {
    let n = space.n_sites();
    if n < 2 {
        return Err(Error::InvalidArgument("bending family needs at least two sites".into()));
    }
    let mut fam = OperatorFamily::new(space.dim());
    for k in 0..n - 1 {
        let mut m = LinOp::zeros(space.dim());
        for j in k + 1..n {
            m = m.try_add(&split_casimir(space, k, j)?)?;
        }
        fam.push(format!("M_{}", k + 1), m, Provenance::Bending { k: k + 1 });
    }
    let cas = diag_casimirs(space);
    let c2 = cas.members().iter().find(|m| m.provenance == Provenance::DiagonalCasimir { l: 2 });
    if let Some(c2) = c2 {
        fam.push("C_2", c2.op.clone(), c2.provenance.clone());
    }
    Ok(fam)
}

/// For each `k`, the generators of the two-site space
/// `[V_k, V_{k+1} ⊗ … ⊗ V_n]` (second site with the diagonal action) at
/// `(z_a, z_b)`, lifted by identity on sites before `k`.
pub fn alim_generators<T: Scalar>(space: &TensorSpace<T>, z_a: &Rational, z_b: &Rational, trunc: i32) -> Result<OperatorFamily<T>> {
    let n = space.n_sites();
    let z = SitePoints::new(vec![z_a.clone(), z_b.clone()])?;
    if n < 2 {
        return Err(Error::InvalidArgument("A_lim needs at least two sites".into()));
    }
    let mut fam = OperatorFamily::new(space.dim());
    for k in 0..n - 1 {
        let tail = TensorSpace::new(space.factors()[k..].to_vec())?;
        let pair = glued_space(&tail, 1)?;
        let gens = extract_generators(&pair, &z, trunc)?;
        for m in gens.members() {
            let op = space.lift(k, &m.op)?;
            let provenance =
                Provenance::Lifted { first_site: k + 1, source: format!("k{}", k + 1), inner: Box::new(m.provenance.clone()) };
            fam.push(format!("k{}:{}", k + 1, m.label), op, provenance);
        }
    }
    Ok(fam)
}

#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum SpanVerdict {
    Equal,
    ModuloCenter,
    Different,
}

#[derive(Clone, Debug, Serialize)]
pub struct SpanComparison {
    pub verdict: SpanVerdict,
    /// Labels of members not found in the other span (empty when equal).
    pub missing: Vec<String>,
}

/// Do the nonzero members of `a` and `b` span the same space? If not, retry
/// with the diagonal Casimirs and the identity added to both sides.
pub fn compare_spans<T: Scalar>(a: &OperatorFamily<T>, b: &OperatorFamily<T>, center: &[LinOp<T>]) -> Result<SpanComparison> {
    let a = a.nonzero();
    let b = b.nonzero();
    let missing = |x: &OperatorFamily<T>, basis: &[LinOp<T>]| -> Result<Vec<String>> {
        let mut out = Vec::new();
        for m in x.members() {
            if !in_span(&m.op, basis)?.member {
                out.push(m.label.clone());
            }
        }
        Ok(out)
    };
    let mut miss = missing(&a, &b.ops())?;
    miss.extend(missing(&b, &a.ops())?);
    if miss.is_empty() {
        return Ok(SpanComparison { verdict: SpanVerdict::Equal, missing: miss });
    }
    let with = |x: &OperatorFamily<T>| {
        let mut v = x.ops();
        v.extend(center.iter().cloned());
        v
    };
    let mut miss2 = missing(&a, &with(&b))?;
    miss2.extend(missing(&b, &with(&a))?);
    let verdict = if miss2.is_empty() { SpanVerdict::ModuloCenter } else { SpanVerdict::Different };
    Ok(SpanComparison { verdict, missing: miss })
}

/// Center used for "equal modulo center": the diagonal Casimirs and the identity.
pub fn diagonal_center<T: Scalar>(space: &TensorSpace<T>) -> Vec<LinOp<T>> {
    let mut c = diag_casimirs(space).ops();
    c.push(LinOp::identity(space.dim()));
    c
}

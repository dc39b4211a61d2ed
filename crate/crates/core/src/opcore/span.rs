use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::opcore::kernel::sparse_axpy;
use crate::opcore::linop::{LinOp, Row};
use crate::scalar::{Rational, Scalar};

/// Relative residual accepted by the float least-squares route.
pub const FLOAT_SPAN_TOL: f64 = 1e-10;

#[derive(Clone, Debug)]
pub struct SpanResult<T> {
    pub member: bool,
    /// Coefficients on the given basis when `member`.
    pub coefficients: Option<Vec<T>>,
    /// Norm of the unexplained part (exactly 0 for exact members).
    pub residual: f64,
}

/// Does `target` lie in the linear span of `basis`, treating matrices as vectors?
pub fn in_span<T: Scalar>(target: &LinOp<T>, basis: &[LinOp<T>]) -> Result<SpanResult<T>> {
    for b in basis {
        if b.dim() != target.dim() {
            return Err(Error::DimMismatch { left: target.dim(), right: b.dim() });
        }
    }
    if T::is_exact() {
        exact_route(target, basis)
    } else {
        float_route(target, basis)
    }
}

fn flatten<T: Scalar>(op: &LinOp<T>) -> Vec<(usize, Rational)> {
    let d = op.dim();
    op.entries()
        .into_iter()
        .map(|(r, c, v)| (r * d + c, v.exact_value().expect("exact field")))
        .collect()
}

fn from_rational<T: Scalar>(q: Rational) -> T {
    T::from_rational(&q)
}

struct EchelonRow {
    pivot: usize,
    vec: Row<Rational>,
    combo: Row<Rational>,
}

fn exact_route<T: Scalar>(target: &LinOp<T>, basis: &[LinOp<T>]) -> Result<SpanResult<T>> {
    let mut ech: Vec<EchelonRow> = Vec::new();
    for (i, b) in basis.iter().enumerate() {
        let mut v = flatten(b);
        let mut combo: Row<Rational> = vec![(i, Rational::from_integer(1.into()))];
        reduce(&ech, &mut v, &mut combo);
        if let Some((pivot, lead)) = v.first().cloned() {
            let inv = lead.recip();
            for (_, x) in v.iter_mut() {
                *x *= &inv;
            }
            for (_, x) in combo.iter_mut() {
                *x *= &inv;
            }
            for row in ech.iter_mut() {
                if let Ok(p) = row.vec.binary_search_by_key(&pivot, |(k, _)| *k) {
                    let c = -row.vec[p].1.clone();
                    row.vec = sparse_axpy(&row.vec, &c, &v);
                    row.combo = sparse_axpy(&row.combo, &c, &combo);
                }
            }
            ech.push(EchelonRow { pivot, vec: v, combo });
        }
    }
    let mut t = flatten(target);
    let mut combo: Row<Rational> = Vec::new();
    reduce(&ech, &mut t, &mut combo);
    if !t.is_empty() {
        let residual = t.iter().map(|(_, x)| crate::scalar::rational_to_f64(x).powi(2)).sum::<f64>().sqrt();
        return Ok(SpanResult { member: false, coefficients: None, residual });
    }
    // reduce() subtracted the combination, so the coefficients are its negation.
    let mut coeffs = vec![T::zero(); basis.len()];
    for (i, x) in combo {
        coeffs[i] = from_rational(-x);
    }
    Ok(SpanResult { member: true, coefficients: Some(coeffs), residual: 0.0 })
}

fn reduce(ech: &[EchelonRow], v: &mut Row<Rational>, combo: &mut Row<Rational>) {
    for row in ech {
        if let Ok(p) = v.binary_search_by_key(&row.pivot, |(k, _)| *k) {
            let c = -v[p].1.clone();
            *v = sparse_axpy(v, &c, &row.vec);
            *combo = sparse_axpy(combo, &c, &row.combo);
        }
    }
}

fn float_route<T: Scalar>(target: &LinOp<T>, basis: &[LinOp<T>]) -> Result<SpanResult<T>> {
    let d = target.dim();
    let n = d * d;
    let tnorm = target.frobenius_norm();
    if basis.is_empty() {
        let member = tnorm == 0.0;
        return Ok(SpanResult { member, coefficients: member.then(Vec::new), residual: tnorm });
    }
    let mut a = DMatrix::<Complex64>::zeros(n, basis.len());
    for (j, b) in basis.iter().enumerate() {
        for (r, c, v) in b.entries() {
            a[(r * d + c, j)] = v.to_c64();
        }
    }
    let mut t = DVector::<Complex64>::zeros(n);
    for (r, c, v) in target.entries() {
        t[r * d + c] = v.to_c64();
    }
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let x = svd
        .solve(&t, smax * 1e-12)
        .map_err(|e| Error::InvalidArgument(format!("least squares failed: {e}")))?;
    let residual = (&a * &x - &t).norm();
    let member = residual <= FLOAT_SPAN_TOL * tnorm.max(f64::MIN_POSITIVE) || (tnorm == 0.0 && residual == 0.0);
    let coefficients = member.then(|| x.iter().map(|c| T::from_c64(*c).expect("float field")).collect());
    Ok(SpanResult { member, coefficients, residual })
}

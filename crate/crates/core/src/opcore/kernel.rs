//! Exact Gauss–Jordan elimination on sparse rational rows.
//!
//! Pivoting is deterministic: for each column in ascending order the pivot is
//! the first not-yet-used row (smallest index) with a nonzero in that column.

use num_traits::{One, Zero};

use crate::opcore::linop::{LinOp, Row};
use crate::scalar::{primitive_integer_vector, Rational};

/// `a + c * b` on column-sorted sparse rows.
pub(crate) fn sparse_axpy(a: &[(usize, Rational)], c: &Rational, b: &[(usize, Rational)]) -> Row<Rational> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        if j >= b.len() || (i < a.len() && a[i].0 < b[j].0) {
            out.push(a[i].clone());
            i += 1;
        } else if i >= a.len() || b[j].0 < a[i].0 {
            out.push((b[j].0, c * &b[j].1));
            j += 1;
        } else {
            let v = &a[i].1 + c * &b[j].1;
            if !v.is_zero() {
                out.push((a[i].0, v));
            }
            i += 1;
            j += 1;
        }
    }
    out
}

fn entry(row: &[(usize, Rational)], col: usize) -> Option<&Rational> {
    row.binary_search_by_key(&col, |(c, _)| *c).ok().map(|p| &row[p].1)
}

/// Reduced row echelon form.
#[derive(Clone, Debug)]
pub struct Echelon {
    pub ncols: usize,
    /// Nonzero reduced rows, pivot entry 1, ordered by pivot column.
    pub rows: Vec<Row<Rational>>,
    pub pivots: Vec<usize>,
}

impl Echelon {
    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    /// Kernel basis, one vector per free column, scaled to primitive integers.
    pub fn kernel(&self) -> Vec<Vec<Rational>> {
        let mut is_pivot = vec![false; self.ncols];
        for &p in &self.pivots {
            is_pivot[p] = true;
        }
        (0..self.ncols)
            .filter(|&f| !is_pivot[f])
            .map(|f| {
                let mut v = vec![Rational::zero(); self.ncols];
                v[f] = Rational::one();
                for (row, &p) in self.rows.iter().zip(&self.pivots) {
                    if let Some(x) = entry(row, f) {
                        v[p] = -x.clone();
                    }
                }
                primitive_integer_vector(&v)
            })
            .collect()
    }
}

pub fn rref(ncols: usize, rows: Vec<Row<Rational>>) -> Echelon {
    let mut active: Vec<Row<Rational>> = rows.into_iter().filter(|r| !r.is_empty()).collect();
    let mut done: Vec<Row<Rational>> = Vec::new();
    let mut pivots = Vec::new();
    for col in 0..ncols {
        if active.is_empty() {
            break;
        }
        let Some(pos) = active.iter().position(|r| entry(r, col).is_some()) else {
            continue;
        };
        let mut pivot_row = active.remove(pos);
        let inv = entry(&pivot_row, col).unwrap().recip();
        for (_, v) in pivot_row.iter_mut() {
            *v *= &inv;
        }
        for r in active.iter_mut().chain(done.iter_mut()) {
            if let Some(x) = entry(r, col) {
                let c = -x.clone();
                *r = sparse_axpy(r, &c, &pivot_row);
            }
        }
        active.retain(|r| !r.is_empty());
        done.push(pivot_row);
        pivots.push(col);
    }
    Echelon { ncols, rows: done, pivots }
}

/// Null-space basis of a square exact operator.
pub fn exact_kernel(a: &LinOp<Rational>) -> Vec<Vec<Rational>> {
    let rows = (0..a.dim()).map(|r| a.row(r)).collect();
    rref(a.dim(), rows).kernel()
}

pub fn exact_rank(a: &LinOp<Rational>) -> usize {
    let rows = (0..a.dim()).map(|r| a.row(r)).collect();
    rref(a.dim(), rows).rank()
}

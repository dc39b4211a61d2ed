use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::scalar::{Rational, Scalar};

/// Operators whose nonzero fraction is below this are stored row-sparse.
pub const SPARSE_DENSITY: f64 = 0.10;

const PAR_ROWS: usize = 48;

#[derive(Clone)]
enum Storage<T> {
    /// Row-major, `dim * dim` entries.
    Dense(Vec<T>),
    /// Per row, column-sorted nonzero entries.
    Sparse(Vec<Vec<(usize, T)>>),
}

/// Square matrix over a scalar field.
///
/// Sparse storage never holds explicit zeros. The storage kind is chosen
/// from the nonzero density after every operation; results do not depend on it.
#[derive(Clone)]
pub struct LinOp<T> {
    dim: usize,
    storage: Storage<T>,
}

pub type Row<T> = Vec<(usize, T)>;

impl<T: Scalar> LinOp<T> {
    pub fn zeros(dim: usize) -> Self {
        LinOp { dim, storage: Storage::Sparse(vec![Vec::new(); dim]) }
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_rows(dim, (0..dim).map(|i| vec![(i, T::one())]).collect())
    }

    pub fn scalar_identity(dim: usize, c: T) -> Self {
        if c.is_zero() {
            return Self::zeros(dim);
        }
        Self::from_rows(dim, (0..dim).map(|i| vec![(i, c.clone())]).collect())
    }

    pub fn diagonal(values: Vec<T>) -> Self {
        let dim = values.len();
        Self::from_rows(dim, values.into_iter().enumerate().map(|(i, v)| vec![(i, v)]).collect())
    }

    /// Row-major dense entries.
    pub fn from_dense(dim: usize, entries: Vec<T>) -> Self {
        assert_eq!(entries.len(), dim * dim, "dense data must have dim^2 entries");
        let rows = entries
            .chunks(dim.max(1))
            .take(dim)
            .map(|r| r.iter().enumerate().filter(|(_, v)| !v.is_zero()).map(|(c, v)| (c, v.clone())).collect())
            .collect();
        Self::from_rows(dim, rows)
    }

    /// Rows of `(column, value)`; unsorted input and duplicates are fine.
    pub fn from_rows(dim: usize, rows: Vec<Row<T>>) -> Self {
        assert_eq!(rows.len(), dim);
        let rows = rows
            .into_iter()
            .map(|mut r| {
                r.sort_by_key(|(c, _)| *c);
                let mut out: Row<T> = Vec::with_capacity(r.len());
                for (c, v) in r {
                    assert!(c < dim, "column {c} out of range for dim {dim}");
                    match out.last_mut() {
                        Some((lc, lv)) if *lc == c => *lv = T::add_ref(lv, &v),
                        _ => out.push((c, v)),
                    }
                }
                out.retain(|(_, v)| !v.is_zero());
                out
            })
            .collect();
        let mut op = LinOp { dim, storage: Storage::Sparse(rows) };
        op.settle();
        op
    }

    pub fn from_triplets(dim: usize, triplets: impl IntoIterator<Item = (usize, usize, T)>) -> Self {
        let mut rows: Vec<Row<T>> = vec![Vec::new(); dim];
        for (r, c, v) in triplets {
            rows[r].push((c, v));
        }
        Self::from_rows(dim, rows)
    }

    fn settle(&mut self) {
        let cap = (self.dim * self.dim) as f64;
        let nnz = self.nnz() as f64;
        let want_dense = self.dim > 0 && nnz >= SPARSE_DENSITY * cap;
        match (&self.storage, want_dense) {
            (Storage::Sparse(rows), true) => {
                let mut data = vec![T::zero(); self.dim * self.dim];
                for (r, row) in rows.iter().enumerate() {
                    for (c, v) in row {
                        data[r * self.dim + c] = v.clone();
                    }
                }
                self.storage = Storage::Dense(data);
            }
            (Storage::Dense(_), false) => {
                let rows = (0..self.dim).map(|r| self.row(r)).collect();
                self.storage = Storage::Sparse(rows);
            }
            _ => {}
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_sparse(&self) -> bool {
        matches!(self.storage, Storage::Sparse(_))
    }

    pub fn nnz(&self) -> usize {
        match &self.storage {
            Storage::Dense(d) => d.iter().filter(|v| !v.is_zero()).count(),
            Storage::Sparse(rows) => rows.iter().map(Vec::len).sum(),
        }
    }

    pub fn get(&self, r: usize, c: usize) -> T {
        match &self.storage {
            Storage::Dense(d) => d[r * self.dim + c].clone(),
            Storage::Sparse(rows) => match rows[r].binary_search_by_key(&c, |(k, _)| *k) {
                Ok(pos) => rows[r][pos].1.clone(),
                Err(_) => T::zero(),
            },
        }
    }

    /// Nonzero entries of row `r`, sorted by column.
    pub fn row(&self, r: usize) -> Row<T> {
        match &self.storage {
            Storage::Dense(d) => d[r * self.dim..(r + 1) * self.dim]
                .iter()
                .enumerate()
                .filter(|(_, v)| !v.is_zero())
                .map(|(c, v)| (c, v.clone()))
                .collect(),
            Storage::Sparse(rows) => rows[r].clone(),
        }
    }

    pub fn for_each_in_row(&self, r: usize, mut f: impl FnMut(usize, &T)) {
        match &self.storage {
            Storage::Dense(d) => {
                for (c, v) in d[r * self.dim..(r + 1) * self.dim].iter().enumerate() {
                    if !v.is_zero() {
                        f(c, v);
                    }
                }
            }
            Storage::Sparse(rows) => {
                for (c, v) in &rows[r] {
                    f(*c, v);
                }
            }
        }
    }

    /// All nonzero entries as `(row, col, value)`, row-major.
    pub fn entries(&self) -> Vec<(usize, usize, T)> {
        let mut out = Vec::new();
        for r in 0..self.dim {
            self.for_each_in_row(r, |c, v| out.push((r, c, v.clone())));
        }
        out
    }

    pub fn to_dense(&self) -> Vec<T> {
        let mut data = vec![T::zero(); self.dim * self.dim];
        for r in 0..self.dim {
            self.for_each_in_row(r, |c, v| data[r * self.dim + c] = v.clone());
        }
        data
    }

    pub fn is_zero(&self) -> bool {
        match &self.storage {
            Storage::Dense(d) => d.iter().all(|v| v.is_zero()),
            Storage::Sparse(rows) => rows.iter().all(Vec::is_empty),
        }
    }

    fn check_dim(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimMismatch { left: self.dim, right: other.dim });
        }
        Ok(())
    }

    fn combine(&self, other: &Self, cb: &T) -> Self {
        // self + cb * other
        let rows = (0..self.dim)
            .map(|r| {
                let a = self.row(r);
                let b = other.row(r);
                let mut out = Vec::with_capacity(a.len() + b.len());
                let (mut i, mut j) = (0, 0);
                while i < a.len() || j < b.len() {
                    if j >= b.len() || (i < a.len() && a[i].0 < b[j].0) {
                        out.push(a[i].clone());
                        i += 1;
                    } else if i >= a.len() || b[j].0 < a[i].0 {
                        out.push((b[j].0, T::mul_ref(cb, &b[j].1)));
                        j += 1;
                    } else {
                        let mut v = a[i].1.clone();
                        T::mul_add_to(&mut v, cb, &b[j].1);
                        if !v.is_zero() {
                            out.push((a[i].0, v));
                        }
                        i += 1;
                        j += 1;
                    }
                }
                out
            })
            .collect();
        let mut op = LinOp { dim: self.dim, storage: Storage::Sparse(rows) };
        op.settle();
        op
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        Ok(self.combine(other, &T::one()))
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        Ok(self.combine(other, &-T::one()))
    }

    /// `self + c * other`
    pub fn try_axpy(&self, c: &T, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        Ok(self.combine(other, c))
    }

    pub fn scale(&self, c: &T) -> Self {
        if c.is_zero() {
            return Self::zeros(self.dim);
        }
        let storage = match &self.storage {
            Storage::Dense(d) => Storage::Dense(d.iter().map(|v| T::mul_ref(c, v)).collect()),
            Storage::Sparse(rows) => {
                Storage::Sparse(rows.iter().map(|r| r.iter().map(|(k, v)| (*k, T::mul_ref(c, v))).collect()).collect())
            }
        };
        LinOp { dim: self.dim, storage }
    }

    fn product_row(&self, other: &Self, r: usize, acc: &mut [T], touched: &mut Vec<usize>, mark: &mut [bool]) -> Row<T> {
        self.for_each_in_row(r, |k, a| {
            other.for_each_in_row(k, |c, b| {
                if !mark[c] {
                    mark[c] = true;
                    touched.push(c);
                }
                T::mul_add_to(&mut acc[c], a, b);
            });
        });
        touched.sort_unstable();
        let mut row = Vec::with_capacity(touched.len());
        for &c in touched.iter() {
            let v = std::mem::replace(&mut acc[c], T::zero());
            mark[c] = false;
            if !v.is_zero() {
                row.push((c, v));
            }
        }
        touched.clear();
        row
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        let n = self.dim;
        if T::is_exact() {
            if let Some(rows) = int_product(self, other) {
                let mut op = LinOp { dim: n, storage: Storage::Sparse(rows) };
                op.settle();
                return Ok(op);
            }
        }
        let rows: Vec<Row<T>> = if n >= PAR_ROWS {
            (0..n)
                .into_par_iter()
                .map_init(
                    || (vec![T::zero(); n], Vec::new(), vec![false; n]),
                    |(acc, touched, mark), r| self.product_row(other, r, acc, touched, mark),
                )
                .collect()
        } else {
            let mut acc = vec![T::zero(); n];
            let mut touched = Vec::new();
            let mut mark = vec![false; n];
            (0..n).map(|r| self.product_row(other, r, &mut acc, &mut touched, &mut mark)).collect()
        };
        let mut op = LinOp { dim: n, storage: Storage::Sparse(rows) };
        op.settle();
        Ok(op)
    }

    /// `self * other - other * self`, with no tolerance applied in float fields.
    pub fn commutator(&self, other: &Self) -> Result<Self> {
        let ab = self.try_mul(other)?;
        let ba = other.try_mul(self)?;
        ab.try_sub(&ba)
    }

    pub fn commutes_with(&self, other: &Self, tol: f64) -> Result<bool> {
        let c = self.commutator(other)?;
        Ok(c.max_abs() <= tol && (!T::is_exact() || c.is_zero()))
    }

    pub fn apply(&self, v: &[T]) -> Vec<T> {
        assert_eq!(v.len(), self.dim);
        (0..self.dim)
            .map(|r| {
                let mut acc = T::zero();
                self.for_each_in_row(r, |c, a| {
                    if !v[c].is_zero() {
                        T::mul_add_to(&mut acc, a, &v[c]);
                    }
                });
                acc
            })
            .collect()
    }

    pub fn transpose(&self) -> Self {
        let mut rows: Vec<Row<T>> = vec![Vec::new(); self.dim];
        for r in 0..self.dim {
            self.for_each_in_row(r, |c, v| rows[c].push((r, v.clone())));
        }
        Self::from_rows(self.dim, rows)
    }

    pub fn trace(&self) -> T {
        (0..self.dim).fold(T::zero(), |acc, i| acc + self.get(i, i))
    }

    /// Kronecker product `self ⊗ other`, `self` indexing the slow digit.
    pub fn kron(&self, other: &Self) -> Self {
        let (n, m) = (self.dim, other.dim);
        let b_rows: Vec<Row<T>> = (0..m).map(|r| other.row(r)).collect();
        let mut rows: Vec<Row<T>> = Vec::with_capacity(n * m);
        for i in 0..n {
            let a_row = self.row(i);
            for b_row in &b_rows {
                let mut row = Vec::with_capacity(a_row.len() * b_row.len());
                for (j, a) in &a_row {
                    for (l, b) in b_row {
                        row.push((j * m + l, T::mul_ref(a, b)));
                    }
                }
                rows.push(row);
            }
        }
        let mut op = LinOp { dim: n * m, storage: Storage::Sparse(rows) };
        op.settle();
        op
    }

    /// `I_left ⊗ self ⊗ I_right`.
    pub fn embed(&self, left: usize, right: usize) -> Self {
        let inner = self.dim;
        let dim = left * inner * right;
        let inner_rows: Vec<Row<T>> = (0..inner).map(|r| self.row(r)).collect();
        let mut rows: Vec<Row<T>> = Vec::with_capacity(dim);
        for a in 0..left {
            for row in &inner_rows {
                for b in 0..right {
                    rows.push(row.iter().map(|(c, v)| ((a * inner + c) * right + b, v.clone())).collect());
                }
            }
        }
        let mut op = LinOp { dim, storage: Storage::Sparse(rows) };
        op.settle();
        op
    }

    pub fn frobenius_norm(&self) -> f64 {
        let mut s = 0.0;
        for r in 0..self.dim {
            self.for_each_in_row(r, |_, v| s += v.magnitude().powi(2));
        }
        s.sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        let mut m: f64 = 0.0;
        for r in 0..self.dim {
            self.for_each_in_row(r, |_, v| m = m.max(v.magnitude()));
        }
        m
    }
}

/// Scaled integer form of an exact operator: `(rows of numerators, common denominator)`,
/// or `None` if some numerator leaves `i64`.
fn integer_rows<T: Scalar>(op: &LinOp<T>) -> Option<(Vec<Vec<(usize, i64)>>, BigInt)> {
    let mut den = BigInt::one();
    let rows: Vec<Row<Rational>> =
        (0..op.dim).map(|r| op.row(r).into_iter().map(|(c, v)| (c, v.exact_value().unwrap())).collect()).collect();
    for row in &rows {
        for (_, v) in row {
            if !v.denom().is_one() {
                den = den.lcm(v.denom());
            }
        }
    }
    let mut out = Vec::with_capacity(rows.len());
    for row in rows {
        let mut r = Vec::with_capacity(row.len());
        for (c, v) in row {
            let x = v.numer() * (&den / v.denom());
            r.push((c, x.to_i64()?));
        }
        out.push(r);
    }
    Some((out, den))
}

/// Exact product through `i128` accumulation; `None` on overflow.
fn int_product<T: Scalar>(a: &LinOp<T>, b: &LinOp<T>) -> Option<Vec<Row<T>>> {
    let (ar, ad) = integer_rows(a)?;
    let (br, bd) = integer_rows(b)?;
    let n = a.dim;
    let den = Rational::from_integer(ad * bd);
    let one_row = |r: usize, acc: &mut Vec<i128>, touched: &mut Vec<usize>, mark: &mut Vec<bool>| -> Option<Row<T>> {
        for &(k, x) in &ar[r] {
            for &(c, y) in &br[k] {
                if !mark[c] {
                    mark[c] = true;
                    touched.push(c);
                }
                acc[c] = acc[c].checked_add((x as i128) * (y as i128))?;
            }
        }
        touched.sort_unstable();
        let mut row = Vec::with_capacity(touched.len());
        for &c in touched.iter() {
            let v = std::mem::replace(&mut acc[c], 0);
            mark[c] = false;
            if v != 0 {
                let q = Rational::from_integer(BigInt::from(v)) / &den;
                row.push((c, T::from_rational(&q)));
            }
        }
        touched.clear();
        Some(row)
    };
    if n >= PAR_ROWS {
        (0..n)
            .into_par_iter()
            .map_init(|| (vec![0i128; n], Vec::new(), vec![false; n]), |(acc, t, m), r| one_row(r, acc, t, m))
            .collect()
    } else {
        let (mut acc, mut t, mut m) = (vec![0i128; n], Vec::new(), vec![false; n]);
        (0..n).map(|r| one_row(r, &mut acc, &mut t, &mut m)).collect()
    }
}

impl LinOp<Rational> {
    /// Exact conversion into any scalar field.
    pub fn to_field<U: Scalar>(&self) -> LinOp<U> {
        let rows = (0..self.dim)
            .map(|r| self.row(r).into_iter().map(|(c, v)| (c, U::from_rational(&v))).collect())
            .collect();
        LinOp::from_rows(self.dim, rows)
    }

    /// Largest absolute entry, exactly.
    pub fn max_abs_exact(&self) -> Rational {
        use num_traits::{Signed, Zero};
        let mut m = Rational::zero();
        for r in 0..self.dim {
            self.for_each_in_row(r, |_, v| {
                let a = v.abs();
                if a > m {
                    m = a;
                }
            });
        }
        m
    }
}

impl<T: Scalar> PartialEq for LinOp<T> {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim && (0..self.dim).all(|r| self.row(r) == other.row(r))
    }
}

impl<T: Scalar> fmt::Debug for LinOp<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "LinOp(dim={}, nnz={}", self.dim, self.nnz())?;
        if self.dim <= 8 {
            write!(f, ", rows=[")?;
            for r in 0..self.dim {
                write!(f, "{:?}", self.row(r))?;
            }
            write!(f, "]")?;
        }
        write!(f, ")")
    }
}

impl<T: Scalar> std::ops::Add for &LinOp<T> {
    type Output = LinOp<T>;
    fn add(self, rhs: Self) -> LinOp<T> {
        self.try_add(rhs).expect("LinOp add")
    }
}

impl<T: Scalar> std::ops::Sub for &LinOp<T> {
    type Output = LinOp<T>;
    fn sub(self, rhs: Self) -> LinOp<T> {
        self.try_sub(rhs).expect("LinOp sub")
    }
}

impl<T: Scalar> std::ops::Mul for &LinOp<T> {
    type Output = LinOp<T>;
    fn mul(self, rhs: Self) -> LinOp<T> {
        self.try_mul(rhs).expect("LinOp mul")
    }
}

impl<T: Scalar> std::ops::Neg for &LinOp<T> {
    type Output = LinOp<T>;
    fn neg(self) -> LinOp<T> {
        self.scale(&-T::one())
    }
}

/// Matrix unit `E_ij` (zero-based) of size `dim`.
pub fn matrix_unit<T: Scalar>(dim: usize, i: usize, j: usize) -> LinOp<T> {
    LinOp::from_triplets(dim, [(i, j, T::one())])
}

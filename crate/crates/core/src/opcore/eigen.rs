//! Dense complex eigen-decomposition for non-normal matrices.
//!
//! Balancing by powers of two, Householder reduction to upper Hessenberg
//! form, then shifted complex QR iteration to a Schur form. Eigenvectors come
//! from back substitution on the triangular factor; near-equal diagonal
//! entries are treated as one eigenvalue so that semisimple repeated
//! eigenvalues yield independent vectors. Every pair is checked against the
//! residual bound and the eigenvector matrix's condition number is reported.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::opcore::linop::LinOp;
use crate::scalar::Scalar;

/// Per-pair bound on `|Av - λv|` relative to `|A|`.
pub const RESIDUAL_TOL: f64 = 1e-9;
/// Eigenbases with a larger condition estimate are rejected.
pub const CONDITION_LIMIT: f64 = 1e8;
/// Diagonal entries of the Schur factor closer than this (relative) are one eigenvalue.
const MERGE_TOL: f64 = 1e-10;

#[derive(Clone, Debug)]
pub struct Eigen {
    pub values: Vec<Complex64>,
    /// Unit-norm eigenvectors as columns, in the order of `values`.
    pub vectors: DMatrix<Complex64>,
    /// `σ_max / σ_min` of `vectors`.
    pub condition: f64,
    /// Largest `|Av - λv| / |A|` over all pairs.
    pub max_residual: f64,
}

pub fn to_complex_matrix<T: Scalar>(a: &LinOp<T>) -> DMatrix<Complex64> {
    let n = a.dim();
    let mut m = DMatrix::<Complex64>::zeros(n, n);
    for (r, c, v) in a.entries() {
        m[(r, c)] = v.to_c64();
    }
    m
}

pub fn eigen<T: Scalar>(a: &LinOp<T>) -> Result<Eigen> {
    eigen_dense(&to_complex_matrix(a))
}

pub fn eigen_dense(a: &DMatrix<Complex64>) -> Result<Eigen> {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "eigen needs a square matrix");
    if n == 0 {
        return Ok(Eigen { values: vec![], vectors: DMatrix::zeros(0, 0), condition: 1.0, max_residual: 0.0 });
    }
    let (mut h, scale) = balance(a);
    let mut z = hessenberg(&mut h);
    schur(&mut h, &mut z)?;
    let x = triangular_eigenvectors(&h);
    let mut v = &z * x;
    for i in 0..n {
        for j in 0..n {
            v[(i, j)] *= scale[i];
        }
    }
    for j in 0..n {
        let norm = v.column(j).norm();
        if norm > 0.0 {
            v.column_mut(j).unscale_mut(norm);
        }
    }
    let values: Vec<Complex64> = (0..n).map(|i| h[(i, i)]).collect();

    let anorm = a.norm().max(f64::MIN_POSITIVE);
    let mut max_residual: f64 = 0.0;
    for (j, lambda) in values.iter().enumerate() {
        let col = v.column(j);
        let r = (a * col - col * *lambda).norm() / anorm;
        max_residual = max_residual.max(r);
    }
    if max_residual > RESIDUAL_TOL {
        return Err(Error::Residual { residual: max_residual, bound: RESIDUAL_TOL });
    }
    let sv = v.clone().svd(false, false).singular_values;
    let smax = sv.iter().cloned().fold(0.0, f64::max);
    let smin = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    let condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    if condition > CONDITION_LIMIT {
        return Err(Error::IllConditioned { condition });
    }
    Ok(Eigen { values, vectors: v, condition, max_residual })
}

/// Diagonal similarity `D^{-1} A D` with power-of-two entries; returns `(B, D)`.
fn balance(a: &DMatrix<Complex64>) -> (DMatrix<Complex64>, Vec<f64>) {
    let n = a.nrows();
    let mut b = a.clone();
    let mut d = vec![1.0; n];
    let radix = 2.0f64;
    let mut converged = false;
    let mut sweeps = 0;
    while !converged && sweeps < 100 {
        converged = true;
        sweeps += 1;
        for i in 0..n {
            let mut c = 0.0;
            let mut r = 0.0;
            for j in 0..n {
                if j != i {
                    c += b[(j, i)].l1_norm();
                    r += b[(i, j)].l1_norm();
                }
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let s = c + r;
            let mut f = 1.0;
            let mut cc = c;
            while cc < r / radix {
                cc *= radix;
                f *= radix;
            }
            let mut cc2 = c;
            let mut f2 = 1.0;
            while cc2 >= r * radix {
                cc2 /= radix;
                f2 /= radix;
            }
            let f = if f != 1.0 { f } else { f2 };
            let (cn, rn) = (c * f, r / f);
            if (cn + rn) < 0.95 * s {
                converged = false;
                d[i] *= f;
                for j in 0..n {
                    b[(i, j)] /= f;
                    b[(j, i)] *= f;
                }
            }
        }
    }
    (b, d)
}

/// Reduces `h` in place to upper Hessenberg form, returning the unitary `Q`
/// with `A = Q H Q^*`.
fn hessenberg(h: &mut DMatrix<Complex64>) -> DMatrix<Complex64> {
    let n = h.nrows();
    let mut q = DMatrix::<Complex64>::identity(n, n);
    for k in 0..n.saturating_sub(2) {
        let x: Vec<Complex64> = (k + 1..n).map(|i| h[(i, k)]).collect();
        let xnorm = x.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if xnorm == 0.0 {
            continue;
        }
        let phase = if x[0].norm() > 0.0 { x[0] / x[0].norm() } else { Complex64::new(1.0, 0.0) };
        let alpha = -phase * xnorm;
        let mut v = x.clone();
        v[0] -= alpha;
        let vnorm = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if vnorm == 0.0 {
            continue;
        }
        for c in v.iter_mut() {
            *c /= vnorm;
        }
        // H <- P H, P = I - 2 v v^*
        for j in 0..n {
            let mut s = Complex64::new(0.0, 0.0);
            for (t, vi) in v.iter().enumerate() {
                s += vi.conj() * h[(k + 1 + t, j)];
            }
            for (t, vi) in v.iter().enumerate() {
                h[(k + 1 + t, j)] -= *vi * s * 2.0;
            }
        }
        // H <- H P, Q <- Q P
        for m in [&mut *h, &mut q] {
            for i in 0..n {
                let mut s = Complex64::new(0.0, 0.0);
                for (t, vi) in v.iter().enumerate() {
                    s += m[(i, k + 1 + t)] * vi;
                }
                for (t, vi) in v.iter().enumerate() {
                    m[(i, k + 1 + t)] -= s * vi.conj() * 2.0;
                }
            }
        }
        for i in k + 2..n {
            h[(i, k)] = Complex64::new(0.0, 0.0);
        }
    }
    q
}

fn givens(x: Complex64, y: Complex64) -> (f64, Complex64) {
    let ax = x.norm();
    let r = (x.norm_sqr() + y.norm_sqr()).sqrt();
    if r == 0.0 {
        return (1.0, Complex64::new(0.0, 0.0));
    }
    if ax == 0.0 {
        return (0.0, Complex64::new(1.0, 0.0));
    }
    (ax / r, (x / ax) * y.conj() / r)
}

/// Shifted QR iteration on a Hessenberg matrix; accumulates into `z`.
fn schur(h: &mut DMatrix<Complex64>, z: &mut DMatrix<Complex64>) -> Result<()> {
    let n = h.nrows();
    let eps = f64::EPSILON;
    let hnorm = h.norm().max(f64::MIN_POSITIVE);
    let max_iter = 40 * n.max(1);
    let mut total = 0;
    let mut hi = n - 1;
    let mut its = 0;
    while hi > 0 {
        let mut l = hi;
        while l > 0 {
            let s = h[(l - 1, l - 1)].norm() + h[(l, l)].norm();
            let s = if s == 0.0 { hnorm } else { s };
            if h[(l, l - 1)].norm() <= eps * s {
                h[(l, l - 1)] = Complex64::new(0.0, 0.0);
                break;
            }
            l -= 1;
        }
        if l == hi {
            hi -= 1;
            its = 0;
            continue;
        }
        its += 1;
        total += 1;
        if total > max_iter {
            return Err(Error::NonConvergence { iterations: total });
        }
        let mu = if its % 11 == 10 {
            h[(hi, hi)] + Complex64::new(0.75 * h[(hi, hi - 1)].norm(), 0.0)
        } else {
            let a = h[(hi - 1, hi - 1)];
            let b = h[(hi - 1, hi)];
            let c = h[(hi, hi - 1)];
            let d = h[(hi, hi)];
            let half = (a - d) * 0.5;
            let disc = (half * half + b * c).sqrt();
            let m1 = (a + d) * 0.5 + disc;
            let m2 = (a + d) * 0.5 - disc;
            if (m1 - d).norm() < (m2 - d).norm() {
                m1
            } else {
                m2
            }
        };
        for k in l..=hi {
            h[(k, k)] -= mu;
        }
        let mut rots = Vec::with_capacity(hi - l);
        for k in l..hi {
            let (c, s) = givens(h[(k, k)], h[(k + 1, k)]);
            for j in k..n {
                let x = h[(k, j)];
                let y = h[(k + 1, j)];
                h[(k, j)] = x * c + s * y;
                h[(k + 1, j)] = -s.conj() * x + y * c;
            }
            rots.push((c, s));
        }
        for (idx, k) in (l..hi).enumerate() {
            let (c, s) = rots[idx];
            let top = (k + 2).min(hi);
            for i in 0..=top {
                let x = h[(i, k)];
                let y = h[(i, k + 1)];
                h[(i, k)] = x * c + y * s.conj();
                h[(i, k + 1)] = -x * s + y * c;
            }
            for i in 0..n {
                let x = z[(i, k)];
                let y = z[(i, k + 1)];
                z[(i, k)] = x * c + y * s.conj();
                z[(i, k + 1)] = -x * s + y * c;
            }
        }
        for k in l..=hi {
            h[(k, k)] += mu;
        }
    }
    for i in 0..n {
        for j in 0..i {
            h[(i, j)] = Complex64::new(0.0, 0.0);
        }
    }
    Ok(())
}

fn triangular_eigenvectors(t: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let n = t.nrows();
    let scale = t.norm().max(1.0);
    let mut x = DMatrix::<Complex64>::zeros(n, n);
    for i in 0..n {
        let lambda = t[(i, i)];
        x[(i, i)] = Complex64::new(1.0, 0.0);
        for j in (0..i).rev() {
            let mut s = Complex64::new(0.0, 0.0);
            for k in j + 1..=i {
                s += t[(j, k)] * x[(k, i)];
            }
            let d = t[(j, j)] - lambda;
            x[(j, i)] = if d.norm() <= MERGE_TOL * scale { Complex64::new(0.0, 0.0) } else { -s / d };
        }
    }
    x
}

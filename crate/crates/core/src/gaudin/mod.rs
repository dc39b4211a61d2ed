//! Gaudin hamiltonians and the higher generators read off the column
//! determinant of `∂ − L(w)`.
//!
//! Pairing on `gl_N` is the trace form, so `Ω^{(i,j)} = Σ_{p,q} E_pq^{(i)} E_qp^{(j)}`
//! and `L(w)_pq = Σ_k E_pq^{(k)} / (w − z_k)`. The column determinant takes factors
//! in ascending column order.

pub mod family;
pub mod series;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::opcore::linop::LinOp;
use crate::repspace::TensorSpace;
use crate::scalar::{format_rational, int, Rational, Scalar};

pub use family::{CommuteReport, Member, OperatorFamily, Provenance};
pub use series::{DiffOp, SeriesCoeff, TruncLaurent};

/// Pairwise distinct exact points.
#[derive(Clone, Debug, PartialEq)]
pub struct SitePoints(Vec<Rational>);

impl SitePoints {
    pub fn new(z: Vec<Rational>) -> Result<Self> {
        for i in 0..z.len() {
            for j in 0..i {
                if z[i] == z[j] {
                    return Err(Error::RepeatedSites);
                }
            }
        }
        Ok(SitePoints(z))
    }

    pub fn from_ints(z: &[i64]) -> Result<Self> {
        Self::new(z.iter().map(|&v| int(v)).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn values(&self) -> &[Rational] {
        &self.0
    }

    /// `a z + b`; `a` must be nonzero.
    pub fn affine(&self, a: &Rational, b: &Rational) -> Result<Self> {
        Self::new(self.0.iter().map(|z| a * z + b).collect())
    }

    pub fn to_strings(&self) -> Vec<String> {
        self.0.iter().map(format_rational).collect()
    }
}

fn check_points<T: Scalar>(space: &TensorSpace<T>, z: &SitePoints) -> Result<()> {
    if z.len() != space.n_sites() {
        return Err(Error::InvalidArgument(format!("{} points for {} sites", z.len(), space.n_sites())));
    }
    Ok(())
}

/// `Ω^{(i,j)} = Σ_{p,q} E_pq^{(i)} E_qp^{(j)}`.
pub fn split_casimir<T: Scalar>(space: &TensorSpace<T>, i: usize, j: usize) -> Result<LinOp<T>> {
    space.check_site(i)?;
    space.check_site(j)?;
    if i == j {
        return Err(Error::InvalidArgument("split Casimir needs two distinct sites".into()));
    }
    let n = space.n_lie();
    let mut acc = LinOp::zeros(space.dim());
    for p in 0..n {
        for q in 0..n {
            acc = acc.try_add(&space.site_op(i, p, q).try_mul(space.site_op(j, q, p))?)?;
        }
    }
    Ok(acc)
}

/// `H_i = Σ_{k≠i} Ω^{(i,k)} / (z_i − z_k)`.
pub fn quadratic_family<T: Scalar>(space: &TensorSpace<T>, z: &SitePoints) -> Result<OperatorFamily<T>> {
    check_points(space, z)?;
    let n = space.n_sites();
    let mut omegas: Vec<Vec<Option<LinOp<T>>>> = vec![vec![None; n]; n];
    for i in 0..n {
        for k in i + 1..n {
            omegas[i][k] = Some(split_casimir(space, i, k)?);
        }
    }
    let zs = z.values();
    let mut fam = OperatorFamily::new(space.dim());
    for i in 0..n {
        let mut h = LinOp::zeros(space.dim());
        for k in 0..n {
            if k == i {
                continue;
            }
            let om = omegas[i.min(k)][i.max(k)].as_ref().unwrap();
            let c = T::from_rational(&(int(1) / (&zs[i] - &zs[k])));
            h = h.try_axpy(&c, om)?;
        }
        fam.push(format!("H_{}", i + 1), h, Provenance::Quadratic { site: i + 1 });
    }
    Ok(fam)
}

/// The Lax matrix expanded at a pole, entries row-major, plus the identity
/// of the coefficient ring.
#[derive(Clone, Debug)]
pub struct LaxSeries<C> {
    pub n_lie: usize,
    pub entries: Vec<TruncLaurent<C>>,
    pub unit: C,
}

impl<C: SeriesCoeff> LaxSeries<C> {
    pub fn entry(&self, p: usize, q: usize) -> &TruncLaurent<C> {
        &self.entries[p * self.n_lie + q]
    }
}

/// Expansion of `Σ_k s(k,p,q) / (w − z_k)` at `w = z_pole + u`, exponents
/// `−1..=trunc`, stored on the window `[−N, trunc]`. `symbol(k, p, q)` is the
/// image of `E_pq` at site `k`.
pub fn lax_from_symbols<C: SeriesCoeff>(
    n_lie: usize,
    z: &SitePoints,
    pole: usize,
    trunc: i32,
    symbol: impl Fn(usize, usize, usize) -> C,
    unit: C,
) -> Result<LaxSeries<C>> {
    let n = z.len();
    if pole >= n {
        return Err(Error::SiteOutOfRange { site: pole + 1, n });
    }
    if trunc < n_lie as i32 {
        return Err(Error::InvalidArgument(format!("truncation {trunc} below N = {n_lie}")));
    }
    let zs = z.values();
    let base = zs[pole].clone();
    let lo = -(n_lie as i32);
    let zero = unit.zero_like();
    let mut entries = Vec::with_capacity(n_lie * n_lie);
    for p in 0..n_lie {
        for q in 0..n_lie {
            let mut s = TruncLaurent::zero(base.clone(), lo, trunc, zero.clone());
            s.set(-1, symbol(pole, p, q));
            for k in (0..n).filter(|&k| k != pole) {
                let d = &zs[k] - &base;
                let e = symbol(k, p, q);
                let mut pw = -(int(1) / &d);
                for j in 0..=trunc {
                    let cur = s.coeff(j).add_coeff(&e.scale_q(&pw));
                    s.set(j, cur);
                    pw /= &d;
                }
            }
            entries.push(s);
        }
    }
    Ok(LaxSeries { n_lie, entries, unit })
}

pub fn lax_series<T: Scalar>(space: &TensorSpace<T>, z: &SitePoints, pole: usize, trunc: i32) -> Result<LaxSeries<LinOp<T>>> {
    check_points(space, z)?;
    lax_from_symbols(space.n_lie(), z, pole, trunc, |k, p, q| space.site_op(k, p, q).clone(), LinOp::identity(space.dim()))
}

/// Permutations of `0..n` with their signs.
pub fn permutations(n: usize) -> Vec<(Vec<usize>, i64)> {
    fn rec(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                prefix.push(i);
                rec(prefix, used, out);
                prefix.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut vec![false; n], &mut out);
    out.into_iter()
        .map(|p| {
            let inversions = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).filter(|&(i, j)| p[i] > p[j]).count();
            (p, if inversions % 2 == 0 { 1 } else { -1 })
        })
        .collect()
}

/// `det^col(∂ − L) = Σ_σ sgn σ · M_{σ(1),1} ∘ … ∘ M_{σ(N),N}`, `M = ∂ − L`.
pub fn column_det<C: SeriesCoeff>(lax: &LaxSeries<C>) -> Result<DiffOp<C>> {
    let n = lax.n_lie;
    let terms: Vec<Result<DiffOp<C>>> = permutations(n)
        .into_par_iter()
        .map(|(sigma, sign)| {
            let factor = |col: usize| DiffOp::first_order(lax.entry(sigma[col], col), sigma[col] == col, &lax.unit);
            let mut acc = factor(0);
            for col in 1..n {
                acc = acc.compose(&factor(col))?;
            }
            Ok(if sign < 0 { acc.scale(&int(-1)) } else { acc })
        })
        .collect();
    let mut total: Option<DiffOp<C>> = None;
    for t in terms {
        let t = t?;
        total = Some(match total {
            None => t,
            Some(acc) => acc.add(&t),
        });
    }
    Ok(total.expect("N >= 1"))
}

/// Principal-part coefficients `(l, m) ↦ coefficient of u^{-m} in c_{N−l}` of
/// the column determinant at a pole, checked against a rerun two orders wider.
pub fn pole_coefficients<C: SeriesCoeff>(
    n_lie: usize,
    build: impl Fn(i32) -> Result<LaxSeries<C>>,
    trunc: i32,
) -> Result<Vec<(usize, usize, C)>> {
    let n = n_lie as i32;
    let d1 = column_det(&build(trunc)?)?;
    if d1.valid_hi() < -1 {
        let (lo, hi) = d1.coeff(0).window();
        return Err(Error::Truncation { lo, hi, required_lo: -n, required_hi: -1 });
    }
    let d2 = column_det(&build(trunc + 2)?)?;
    let mut out = Vec::new();
    for l in 1..=n_lie {
        for m in 1..=l {
            let a = d1.coeff(n_lie - l).coeff(-(m as i32));
            if a != d2.coeff(n_lie - l).coeff(-(m as i32)) {
                return Err(Error::TruncationUnstable { label: format!("l={l}, m={m}") });
            }
            out.push((l, m, a.clone()));
        }
    }
    Ok(out)
}

/// Generators `S_l^{(i,m)}`: for poles `i < n` all `m = 1..l`, for the last pole
/// only `m = l`; followed by the diagonal Casimirs `Tr E^l`.
pub fn extract_generators<T: Scalar>(space: &TensorSpace<T>, z: &SitePoints, trunc: i32) -> Result<OperatorFamily<T>> {
    check_points(space, z)?;
    let n_lie = space.n_lie();
    if trunc < 2 * n_lie as i32 {
        return Err(Error::InvalidArgument(format!("truncation {trunc} below 2N = {}", 2 * n_lie)));
    }
    let n = space.n_sites();
    let per_pole: Vec<Result<Vec<(usize, usize, LinOp<T>)>>> = (0..n)
        .into_par_iter()
        .map(|pole| pole_coefficients(n_lie, |t| lax_series(space, z, pole, t), trunc))
        .collect();
    let mut fam = OperatorFamily::new(space.dim());
    for (pole, coeffs) in per_pole.into_iter().enumerate() {
        for (l, m, op) in coeffs? {
            if pole + 1 == n && m != l {
                continue;
            }
            fam.push(format!("S_{l}^({},{m})", pole + 1), op, Provenance::Laurent { pole: pole + 1, l, m });
        }
    }
    fam.extend(diag_casimirs(space));
    Ok(fam)
}

/// `Tr E^l`, `l = 1..N`, for the diagonal action.
pub fn diag_casimirs<T: Scalar>(space: &TensorSpace<T>) -> OperatorFamily<T> {
    let n = space.n_lie();
    let e: Vec<LinOp<T>> = (0..n * n).map(|k| space.diag_gen(k / n, k % n)).collect();
    let mut fam = OperatorFamily::new(space.dim());
    let mut power = e.clone();
    for l in 1..=n {
        if l > 1 {
            power = (0..n * n)
                .into_par_iter()
                .map(|k| {
                    let (a, b) = (k / n, k % n);
                    (0..n).fold(LinOp::zeros(space.dim()), |acc, c| acc.try_add(&power[a * n + c].try_mul(&e[c * n + b]).unwrap()).unwrap())
                })
                .collect();
        }
        let tr = (0..n).fold(LinOp::zeros(space.dim()), |acc, a| acc.try_add(&power[a * n + a]).unwrap());
        fam.push(format!("C_{l}"), tr, Provenance::DiagonalCasimir { l });
    }
    fam
}

/// Quadratic hamiltonians together with the extracted generators.
pub fn gaudin_family<T: Scalar>(space: &TensorSpace<T>, z: &SitePoints, trunc: i32) -> Result<OperatorFamily<T>> {
    let mut fam = quadratic_family(space, z)?;
    fam.extend(extract_generators(space, z, trunc)?);
    Ok(fam)
}

pub fn default_trunc(n_lie: usize) -> i32 {
    2 * n_lie as i32
}

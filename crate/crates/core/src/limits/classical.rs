//! Classical bending hamiltonians on `gl_N^{⊕n}` and the Lie–Poisson bracket.
//!
//! A point is a tuple of `N×N` rational matrices `X_1..X_n`. For a function `f`
//! the gradient at site `j` is the matrix `∇_j f` with `df[δ] = Tr(∇_j f · δ)`,
//! and `{f, g}(X) = Σ_j Tr(X_j [∇_j f, ∇_j g])`.

use nalgebra::{DMatrix, DVector};
use num_traits::{One, Zero};
use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gaudin::{lax_from_symbols, pole_coefficients, SitePoints};
use crate::opcore::kernel::rref;
use crate::opcore::linop::LinOp;
use crate::scalar::{format_rational, int, rational_to_f64, Rational};

type Mat = LinOp<Rational>;

#[derive(Clone, Debug, PartialEq)]
pub struct ClassicalPoint {
    xs: Vec<Mat>,
}

impl ClassicalPoint {
    pub fn new(xs: Vec<Mat>) -> Result<Self> {
        let n = xs.first().map(LinOp::dim).ok_or(Error::EmptyFactors)?;
        if let Some(x) = xs.iter().find(|x| x.dim() != n) {
            return Err(Error::DimMismatch { left: n, right: x.dim() });
        }
        Ok(ClassicalPoint { xs })
    }

    /// Entries `p/q` with `|p| <= bound`, `1 <= q <= bound`.
    pub fn random(n_lie: usize, n_sites: usize, bound: i64, rng: &mut impl Rng) -> Self {
        let xs = (0..n_sites)
            .map(|_| {
                let entries = (0..n_lie * n_lie).map(|_| Rational::new(rng.gen_range(-bound..=bound).into(), rng.gen_range(1..=bound).into())).collect();
                LinOp::from_dense(n_lie, entries)
            })
            .collect();
        ClassicalPoint { xs }
    }

    pub fn n_lie(&self) -> usize {
        self.xs[0].dim()
    }

    pub fn n_sites(&self) -> usize {
        self.xs.len()
    }

    pub fn x(&self, site: usize) -> &Mat {
        &self.xs[site]
    }

    pub fn scaled(&self, t: &Rational) -> Self {
        ClassicalPoint { xs: self.xs.iter().map(|x| x.scale(t)).collect() }
    }

    /// `Y_k = Σ_{i>k} X_i`.
    pub fn tail_sum(&self, k: usize) -> Mat {
        self.xs[k + 1..].iter().fold(LinOp::zeros(self.n_lie()), |acc, x| &acc + x)
    }

    pub fn to_f64(&self) -> Vec<DMatrix<f64>> {
        self.xs
            .iter()
            .map(|x| {
                let n = x.dim();
                DMatrix::from_fn(n, n, |r, c| rational_to_f64(&x.get(r, c)))
            })
            .collect()
    }
}

/// Functions whose bracket can be evaluated exactly. Sites are 0-based.
#[derive(Clone, Debug, PartialEq)]
pub enum ClassicalFn {
    /// Coefficient of `z^alpha` in `Tr (X_k + z Y_k)^l`.
    Bending { l: usize, k: usize, alpha: usize },
    /// `Tr(A X_site)`.
    Linear { site: usize, a: Mat },
}

/// Coefficients in `z` of `(X + zY)^p`, index = degree.
fn poly_power(x: &Mat, y: &Mat, p: usize) -> Vec<Mat> {
    let n = x.dim();
    let mut acc = vec![LinOp::identity(n)];
    for _ in 0..p {
        let mut next = vec![LinOp::zeros(n); acc.len() + 1];
        for (d, c) in acc.iter().enumerate() {
            next[d] = &next[d] + &(c * x);
            next[d + 1] = &next[d + 1] + &(c * y);
        }
        acc = next;
    }
    acc
}

/// `H̄_{l,k}^{(α)}`: coefficient of `z^alpha` in `Tr (X_k + z Y_k)^l`.
pub fn classical_bending(point: &ClassicalPoint, l: usize, k: usize, alpha: usize) -> Result<Rational> {
    if k >= point.n_sites() {
        return Err(Error::SiteOutOfRange { site: k + 1, n: point.n_sites() });
    }
    if l == 0 || alpha > l {
        return Err(Error::InvalidArgument(format!("need 1 <= l and alpha <= l, got l={l}, alpha={alpha}")));
    }
    Ok(poly_power(point.x(k), &point.tail_sum(k), l)[alpha].trace())
}

impl ClassicalFn {
    pub fn value(&self, point: &ClassicalPoint) -> Result<Rational> {
        match self {
            ClassicalFn::Bending { l, k, alpha } => classical_bending(point, *l, *k, *alpha),
            ClassicalFn::Linear { site, a } => Ok((a * point.x(*site)).trace()),
        }
    }

    /// `∇_site f`.
    pub fn gradient(&self, point: &ClassicalPoint, site: usize) -> Mat {
        let n = point.n_lie();
        match self {
            ClassicalFn::Linear { site: s, a } => {
                if *s == site {
                    a.clone()
                } else {
                    LinOp::zeros(n)
                }
            }
            ClassicalFn::Bending { l, k, alpha } => {
                // d Tr M^l = l Tr(M^{l-1} dM), dM/dX_j = 1 (j = k), z (j > k), 0 (j < k)
                let shift = match site.cmp(k) {
                    std::cmp::Ordering::Less => return LinOp::zeros(n),
                    std::cmp::Ordering::Equal => 0,
                    std::cmp::Ordering::Greater => 1,
                };
                if *alpha < shift {
                    return LinOp::zeros(n);
                }
                let pw = poly_power(point.x(*k), &point.tail_sum(*k), l - 1);
                match pw.get(alpha - shift) {
                    Some(c) => c.scale(&int(*l as i64)),
                    None => LinOp::zeros(n),
                }
            }
        }
    }
}

/// `{f, g}(X) = Σ_j Tr(X_j [∇_j f, ∇_j g])`, exactly.
pub fn poisson_bracket(f: &ClassicalFn, g: &ClassicalFn, point: &ClassicalPoint) -> Result<Rational> {
    let mut acc = Rational::zero();
    for j in 0..point.n_sites() {
        let gf = f.gradient(point, j);
        let gg = g.gradient(point, j);
        acc += (point.x(j) * &gf.commutator(&gg)?).trace();
    }
    Ok(acc)
}

/// `f` in floating point, computed without the polynomial-power code: sample
/// `t ↦ Tr (X_k + t Y_k)^l` at `t = 0..l` and interpolate.
fn value_f64(f: &ClassicalFn, xs: &[DMatrix<f64>]) -> f64 {
    match f {
        ClassicalFn::Linear { site, a } => {
            let n = a.dim();
            let am = DMatrix::from_fn(n, n, |r, c| rational_to_f64(&a.get(r, c)));
            (am * &xs[*site]).trace()
        }
        ClassicalFn::Bending { l, k, alpha } => {
            let n = xs[0].nrows();
            let y = xs[k + 1..].iter().fold(DMatrix::zeros(n, n), |acc, x| acc + x);
            let samples = DVector::from_fn(l + 1, |t, _| {
                let m = &xs[*k] + &y * t as f64;
                let mut p = DMatrix::identity(n, n);
                for _ in 0..*l {
                    p = &p * &m;
                }
                p.trace()
            });
            let v = DMatrix::from_fn(l + 1, l + 1, |t, d| (t as f64).powi(d as i32));
            let coeffs = v.lu().solve(&samples).expect("Vandermonde on distinct nodes");
            coeffs[*alpha]
        }
    }
}

fn numeric_gradient(f: &ClassicalFn, xs: &[DMatrix<f64>], site: usize, h: f64) -> DMatrix<f64> {
    let n = xs[0].nrows();
    let central = |p: usize, q: usize, h: f64| {
        let mut plus = xs.to_vec();
        let mut minus = xs.to_vec();
        plus[site][(p, q)] += h;
        minus[site][(p, q)] -= h;
        (value_f64(f, &plus) - value_f64(f, &minus)) / (2.0 * h)
    };
    // (∇f)_{qp} = ∂f/∂x_{pq}; Richardson on h, h/2
    DMatrix::from_fn(n, n, |q, p| (4.0 * central(p, q, h / 2.0) - central(p, q, h)) / 3.0)
}

/// Independent bracket from central differences with Richardson extrapolation.
pub fn fd_poisson_bracket(f: &ClassicalFn, g: &ClassicalFn, point: &ClassicalPoint, h: f64) -> f64 {
    let xs = point.to_f64();
    (0..xs.len())
        .map(|j| {
            let gf = numeric_gradient(f, &xs, j, h);
            let gg = numeric_gradient(g, &xs, j, h);
            (&xs[j] * (&gf * &gg - &gg * &gf)).trace()
        })
        .sum()
}

/// All bending functions with `l <= max_l` on `n_sites` sites.
pub fn bending_functions(n_sites: usize, max_l: usize) -> Vec<ClassicalFn> {
    let mut out = Vec::new();
    for k in 0..n_sites {
        for l in 1..=max_l {
            for alpha in 0..=l {
                out.push(ClassicalFn::Bending { l, k, alpha });
            }
        }
    }
    out
}

#[derive(Clone, Debug, Serialize)]
pub struct GrCheck {
    pub k: usize,
    pub pole: usize,
    pub m: usize,
    pub alpha: usize,
    /// Coefficient of `H̄_{2,k}^{(α)}` in the symbol.
    pub coefficient: String,
    /// Coefficients of the central quadratics, in the order of [`CENTRAL_QUADRATICS`].
    pub central: Vec<String>,
    pub passed: bool,
}

pub const CENTRAL_QUADRATICS: [&str; 5] = ["Tr X^2", "Tr Y^2", "(Tr X)^2", "Tr X Tr Y", "(Tr Y)^2"];

fn central_values(x: &Mat, y: &Mat) -> [Rational; 5] {
    let (tx, ty) = (x.trace(), y.trace());
    [(x * x).trace(), (y * y).trace(), &tx * &tx, &tx * &ty, &ty * &ty]
}

/// Quadratic symbols of the alim generators at site `k`: the column
/// determinant is evaluated with commuting coefficients (`E_pq ↦ (X_k)_pq` on
/// the first site, `(Y_k)_pq` on the second), the homogeneous quadratic part is
/// isolated, and it is fitted exactly against `H̄_{2,k}^{(α)}` plus the central
/// quadratics. The match needs a nonzero `H̄` coefficient.
pub fn gr_consistency(points: &[ClassicalPoint], k: usize, z_a: &Rational, z_b: &Rational) -> Result<Vec<GrCheck>> {
    let n_lie = points[0].n_lie();
    let z = SitePoints::new(vec![z_a.clone(), z_b.clone()])?;
    let trunc = 2 * n_lie as i32;
    let symbols = |p: &ClassicalPoint, pole: usize| -> Result<Vec<(usize, usize, Rational)>> {
        let x = p.x(k).clone();
        let y = p.tail_sum(k);
        pole_coefficients(
            n_lie,
            |t| lax_from_symbols(n_lie, &z, pole, t, |site, a, b| if site == 0 { x.get(a, b) } else { y.get(a, b) }, Rational::one()),
            trunc,
        )
    };
    let quadratic = |p: &ClassicalPoint, pole: usize, m: usize| -> Result<Rational> {
        let pick = |v: Vec<(usize, usize, Rational)>| v.into_iter().find(|(l, mm, _)| *l == 2 && *mm == m).unwrap().2;
        let f2 = pick(symbols(&p.scaled(&int(2)), pole)?);
        let f1 = pick(symbols(p, pole)?);
        let f0 = pick(symbols(&p.scaled(&int(0)), pole)?);
        Ok((f2 - f1 * int(2) + f0) / int(2))
    };
    let mut out = Vec::new();
    for (pole, m, alpha) in [(0usize, 1usize, 1usize), (0, 2, 0), (1, 2, 2)] {
        // columns: target, central quadratics except the one equal to the target, rhs
        let skip = match alpha {
            0 => Some(0),
            2 => Some(1),
            _ => None,
        };
        let cols: Vec<usize> = (0..5).filter(|c| Some(*c) != skip).collect();
        let ncols = cols.len() + 2;
        let mut rows = Vec::new();
        for p in points {
            let x = p.x(k);
            let y = p.tail_sum(k);
            let target = classical_bending(p, 2, k, alpha)?;
            let cv = central_values(x, &y);
            let mut row = vec![(0, target)];
            for (i, &c) in cols.iter().enumerate() {
                row.push((i + 1, cv[c].clone()));
            }
            row.push((ncols - 1, quadratic(p, pole, m)?));
            row.retain(|(_, v)| !v.is_zero());
            rows.push(row);
        }
        let ech = rref(ncols, rows);
        let consistent = !ech.pivots.contains(&(ncols - 1));
        let mut sol = vec![Rational::zero(); ncols - 1];
        for (row, &pv) in ech.rows.iter().zip(&ech.pivots) {
            if pv < ncols - 1 {
                sol[pv] = row.iter().find(|(c, _)| *c == ncols - 1).map(|(_, v)| v.clone()).unwrap_or_else(Rational::zero);
            }
        }
        let mut central = vec!["0/1".to_string(); 5];
        for (i, &c) in cols.iter().enumerate() {
            central[c] = format_rational(&sol[i + 1]);
        }
        out.push(GrCheck {
            k: k + 1,
            pole: pole + 1,
            m,
            alpha,
            coefficient: format_rational(&sol[0]),
            central,
            passed: consistent && !sol[0].is_zero(),
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn bending_special_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let p = ClassicalPoint::random(2, 3, 9, &mut rng);
        let x = p.x(0);
        let y = p.tail_sum(0);
        assert_eq!(classical_bending(&p, 3, 0, 0).unwrap(), (&(x * x) * x).trace());
        assert_eq!(classical_bending(&p, 3, 0, 3).unwrap(), (&(&y * &y) * &y).trace());
        assert_eq!(classical_bending(&p, 2, 0, 1).unwrap(), (x * &y).trace() * int(2));
    }

    #[test]
    fn linear_bracket_is_lie_poisson() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let p = ClassicalPoint::random(2, 2, 9, &mut rng);
        let a = LinOp::from_dense(2, vec![int(1), int(2), int(0), int(-1)]);
        let b = LinOp::from_dense(2, vec![int(0), int(1), int(3), int(2)]);
        let f = ClassicalFn::Linear { site: 0, a: a.clone() };
        let g = ClassicalFn::Linear { site: 0, a: b.clone() };
        assert_eq!(poisson_bracket(&f, &g, &p).unwrap(), (p.x(0) * &a.commutator(&b).unwrap()).trace());
        assert!(poisson_bracket(&f, &f, &p).unwrap().is_zero());
        let h = ClassicalFn::Linear { site: 1, a: b };
        assert!(poisson_bracket(&f, &h, &p).unwrap().is_zero());
    }

    #[test]
    fn bending_pair_commutes_and_matches_fd() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10 {
            let p = ClassicalPoint::random(2, 2, 20, &mut rng);
            let f = ClassicalFn::Bending { l: 2, k: 0, alpha: 0 };
            let g = ClassicalFn::Bending { l: 2, k: 0, alpha: 1 };
            assert!(poisson_bracket(&f, &g, &p).unwrap().is_zero());
            assert!(fd_poisson_bracket(&f, &g, &p, 1e-4).abs() < 1e-6);
        }
    }

    #[test]
    fn fd_oracle_sees_nonzero_brackets() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let p = ClassicalPoint::random(2, 1, 9, &mut rng);
        let f = ClassicalFn::Linear { site: 0, a: LinOp::from_dense(2, vec![int(0), int(1), int(0), int(0)]) };
        let g = ClassicalFn::Linear { site: 0, a: LinOp::from_dense(2, vec![int(0), int(0), int(1), int(0)]) };
        let exact = rational_to_f64(&poisson_bracket(&f, &g, &p).unwrap());
        assert!(exact.abs() > 1e-3);
        assert!((fd_poisson_bracket(&f, &g, &p, 1e-4) - exact).abs() < 1e-6);
    }
}

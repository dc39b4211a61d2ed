//! `gl_N`-modules as explicit generator matrices, and their tensor products.
//!
//! Indices are 0-based throughout: `gen(i, j)` is the action of `E_{i+1,j+1}`
//! and site `k` is the `(k+1)`-th tensor factor.

use std::collections::{BTreeMap, HashMap};
use std::sync::OnceLock;

use num_traits::{ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::opcore::kernel::rref;
use crate::opcore::linop::{LinOp, Row};
use crate::scalar::{int, Rational, Scalar};

#[derive(Clone, Debug)]
pub struct ModuleRep<T: Scalar> {
    n_lie: usize,
    dim: usize,
    gens: Vec<LinOp<T>>,
    label: String,
    /// `Some(m)` for `S^m C^N`.
    degree: Option<usize>,
}

impl<T: Scalar> ModuleRep<T> {
    pub fn n_lie(&self) -> usize {
        self.n_lie
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn gen(&self, i: usize, j: usize) -> &LinOp<T> {
        &self.gens[i * self.n_lie + j]
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn degree(&self) -> Option<usize> {
        self.degree
    }

    pub fn is_standard(&self) -> bool {
        self.degree == Some(1)
    }

    /// Largest exact violation of `[E_ij, E_kl] = δ_jk E_il − δ_li E_kj`; returns the
    /// first offending quadruple, if any.
    pub fn relation_violation(&self, tol: f64) -> Result<Option<(usize, usize, usize, usize)>> {
        let n = self.n_lie;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        let lhs = self.gen(i, j).commutator(self.gen(k, l))?;
                        let mut rhs = LinOp::zeros(self.dim);
                        if j == k {
                            rhs = rhs.try_add(self.gen(i, l))?;
                        }
                        if l == i {
                            rhs = rhs.try_sub(self.gen(k, j))?;
                        }
                        let d = lhs.try_sub(&rhs)?;
                        if !d.is_zero() && (T::is_exact() || d.max_abs() > tol) {
                            return Ok(Some((i, j, k, l)));
                        }
                    }
                }
            }
        }
        Ok(None)
    }
}

impl ModuleRep<Rational> {
    pub fn to_field<U: Scalar>(&self) -> ModuleRep<U> {
        ModuleRep {
            n_lie: self.n_lie,
            dim: self.dim,
            gens: self.gens.iter().map(LinOp::to_field).collect(),
            label: self.label.clone(),
            degree: self.degree,
        }
    }
}

pub fn standard_module(n: usize) -> ModuleRep<Rational> {
    let mut m = symmetric_power(n, 1);
    m.label = format!("C^{n}");
    m
}

/// Exponent vectors of total degree `m` in `n` variables, degree-lex
/// (`x_1^m` first).
pub fn monomials(n: usize, m: usize) -> Vec<Vec<usize>> {
    fn rec(n: usize, left: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if prefix.len() + 1 == n {
            prefix.push(left);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for a in (0..=left).rev() {
            prefix.push(a);
            rec(n, left - a, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if n == 0 {
        return out;
    }
    rec(n, m, &mut Vec::new(), &mut out);
    out
}

/// `S^m C^N` on monomials, `E_ij = x_i ∂/∂x_j`.
pub fn symmetric_power(n: usize, m: usize) -> ModuleRep<Rational> {
    assert!(n >= 1, "gl_N needs N >= 1");
    let basis = monomials(n, m);
    let index: HashMap<Vec<usize>, usize> = basis.iter().cloned().enumerate().map(|(i, a)| (a, i)).collect();
    let dim = basis.len();
    let mut gens = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let mut trip = Vec::new();
            for (col, alpha) in basis.iter().enumerate() {
                if alpha[j] == 0 {
                    continue;
                }
                let mut beta = alpha.clone();
                beta[j] -= 1;
                beta[i] += 1;
                trip.push((index[&beta], col, int(alpha[j] as i64)));
            }
            gens.push(LinOp::from_triplets(dim, trip));
        }
    }
    ModuleRep { n_lie: n, dim, gens, label: format!("S^{m}C^{n}"), degree: Some(m) }
}

/// One module on the tensor product, `E_ij ↦ Σ_sites E_ij^{(site)}`.
pub fn diag_composite<T: Scalar>(factors: &[ModuleRep<T>]) -> Result<ModuleRep<T>> {
    if factors.len() == 1 {
        return Ok(factors[0].clone());
    }
    let space = TensorSpace::new(factors.to_vec())?;
    let n = space.n_lie();
    let gens = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| space.diag_gen(i, j)).collect();
    let label = format!("({})", factors.iter().map(|f| f.label.as_str()).collect::<Vec<_>>().join("⊗"));
    Ok(ModuleRep { n_lie: n, dim: space.dim(), gens, label, degree: None })
}

/// Ordered tensor product with a mixed-radix codec, site 0 slowest.
#[derive(Debug)]
pub struct TensorSpace<T: Scalar> {
    factors: Vec<ModuleRep<T>>,
    dims: Vec<usize>,
    dim: usize,
    n_lie: usize,
    site_ops: Vec<OnceLock<LinOp<T>>>,
}

impl<T: Scalar> Clone for TensorSpace<T> {
    fn clone(&self) -> Self {
        TensorSpace {
            factors: self.factors.clone(),
            dims: self.dims.clone(),
            dim: self.dim,
            n_lie: self.n_lie,
            site_ops: self.site_ops.clone(),
        }
    }
}

impl<T: Scalar> TensorSpace<T> {
    pub fn new(factors: Vec<ModuleRep<T>>) -> Result<Self> {
        let first = factors.first().ok_or(Error::EmptyFactors)?;
        let n_lie = first.n_lie;
        for f in &factors {
            if f.n_lie != n_lie {
                return Err(Error::LieRankMismatch(n_lie, f.n_lie));
            }
        }
        let dims: Vec<usize> = factors.iter().map(|f| f.dim).collect();
        let dim = dims.iter().product();
        let site_ops = (0..factors.len() * n_lie * n_lie).map(|_| OnceLock::new()).collect();
        Ok(TensorSpace { factors, dims, dim, n_lie, site_ops })
    }

    pub fn n_sites(&self) -> usize {
        self.factors.len()
    }

    pub fn n_lie(&self) -> usize {
        self.n_lie
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn factors(&self) -> &[ModuleRep<T>] {
        &self.factors
    }

    pub fn factor(&self, site: usize) -> &ModuleRep<T> {
        &self.factors[site]
    }

    pub fn site_dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn encode(&self, digits: &[usize]) -> usize {
        digits.iter().zip(&self.dims).fold(0, |acc, (d, r)| acc * r + d)
    }

    pub fn decode(&self, mut index: usize) -> Vec<usize> {
        let mut digits = vec![0; self.dims.len()];
        for (k, r) in self.dims.iter().enumerate().rev() {
            digits[k] = index % r;
            index /= r;
        }
        digits
    }

    pub fn check_site(&self, site: usize) -> Result<()> {
        if site >= self.n_sites() {
            return Err(Error::SiteOutOfRange { site: site + 1, n: self.n_sites() });
        }
        Ok(())
    }

    /// `E_ij` acting at `site`, cached.
    pub fn site_op(&self, site: usize, i: usize, j: usize) -> &LinOp<T> {
        let n = self.n_lie;
        self.site_ops[(site * n + i) * n + j].get_or_init(|| {
            let left: usize = self.dims[..site].iter().product();
            let right: usize = self.dims[site + 1..].iter().product();
            self.factors[site].gen(i, j).embed(left, right)
        })
    }

    pub fn embed_at_site(&self, site: usize, i: usize, j: usize) -> Result<LinOp<T>> {
        self.check_site(site)?;
        if i >= self.n_lie || j >= self.n_lie {
            return Err(Error::InvalidArgument(format!("generator index ({i},{j}) out of range for gl_{}", self.n_lie)));
        }
        Ok(self.site_op(site, i, j).clone())
    }

    /// Diagonal action `Σ_sites E_ij^{(site)}`.
    pub fn diag_gen(&self, i: usize, j: usize) -> LinOp<T> {
        (0..self.n_sites()).fold(LinOp::zeros(self.dim), |acc, s| acc.try_add(self.site_op(s, i, j)).unwrap())
    }

    /// Operator acting on sites `range` of this space, given on the tensor
    /// product of those sites, lifted by identities on the remaining sites.
    pub fn lift(&self, first_site: usize, op: &LinOp<T>) -> Result<LinOp<T>> {
        let left: usize = self.dims[..first_site].iter().product();
        let inner = op.dim();
        if !self.dim.is_multiple_of(left * inner) {
            return Err(Error::DimMismatch { left: self.dim, right: left * inner });
        }
        Ok(op.embed(left, self.dim / (left * inner)))
    }
}

impl TensorSpace<Rational> {
    pub fn to_field<U: Scalar>(&self) -> TensorSpace<U> {
        TensorSpace::new(self.factors.iter().map(ModuleRep::to_field).collect()).unwrap()
    }

    /// Weight of every basis vector, read off the diagonal of `Σ E_aa`.
    pub fn weights(&self) -> Vec<Vec<i64>> {
        let mut w = vec![vec![0i64; self.n_lie]; self.dim];
        for a in 0..self.n_lie {
            let h = self.diag_gen(a, a);
            for (r, c, v) in h.entries() {
                assert_eq!(r, c, "basis is not a weight basis");
                w[r][a] = v.to_integer().to_i64().expect("weight fits i64");
            }
        }
        w
    }

    /// Basis of `∩_a ker Σ_sites E_{a,a+1}`, computed weight block by weight
    /// block; returns vectors and their weights, blocks in descending lex order.
    pub fn singular_subspace(&self) -> SingularBasis {
        let weights = self.weights();
        let mut blocks: BTreeMap<Vec<i64>, Vec<usize>> = BTreeMap::new();
        for (i, w) in weights.iter().enumerate() {
            blocks.entry(w.clone()).or_default().push(i);
        }
        let raising: Vec<LinOp<Rational>> = (0..self.n_lie.saturating_sub(1)).map(|a| self.diag_gen(a, a + 1)).collect();
        let mut vectors = Vec::new();
        let mut vweights = Vec::new();
        for (w, cols) in blocks.iter().rev() {
            let local: HashMap<usize, usize> = cols.iter().enumerate().map(|(k, &c)| (c, k)).collect();
            // rows of the raising operators restricted to this block, keyed by output index
            let mut rows: BTreeMap<(usize, usize), Row<Rational>> = BTreeMap::new();
            for (a, e) in raising.iter().enumerate() {
                let t = e.transpose();
                for &c in cols {
                    for (r, v) in t.row(c) {
                        rows.entry((a, r)).or_default().push((local[&c], v));
                    }
                }
            }
            let rows: Vec<Row<Rational>> = rows.into_values().collect();
            let ech = rref(cols.len(), rows);
            for k in ech.kernel() {
                let mut v = vec![Rational::zero(); self.dim];
                for (pos, x) in k.into_iter().enumerate() {
                    v[cols[pos]] = x;
                }
                vectors.push(v);
                vweights.push(w.clone());
            }
        }
        SingularBasis { vectors, weights: vweights }
    }
}

#[derive(Clone, Debug)]
pub struct SingularBasis {
    pub vectors: Vec<Vec<Rational>>,
    pub weights: Vec<Vec<i64>>,
}

impl SingularBasis {
    pub fn dim(&self) -> usize {
        self.vectors.len()
    }

    /// Vectors of one weight.
    pub fn of_weight(&self, w: &[i64]) -> Vec<Vec<Rational>> {
        self.vectors.iter().zip(&self.weights).filter(|(_, x)| x.as_slice() == w).map(|(v, _)| v.clone()).collect()
    }
}

/// Tensor product of symmetric powers `S^{m_1} ⊗ … ⊗ S^{m_n}` of `C^N`.
pub fn symmetric_tensor_space(n_lie: usize, degrees: &[usize]) -> Result<TensorSpace<Rational>> {
    TensorSpace::new(degrees.iter().map(|&m| symmetric_power(n_lie, m)).collect())
}

//! `(gl_N, gl_M)` duality on `S^d(C^N ⊗ C^M)`.
//!
//! Variables `x_{ia}`, `i < N`, `a < M`. `gl_N` acts by `Σ_a x_{ia} ∂_{ja}`,
//! `gl_M` by `Σ_i x_{ia} ∂_{ib}`. The multidegree component with column
//! degrees `m` is identified with `⊗_a S^{m_a} C^N` by reading column `a` of
//! the exponent matrix as a monomial of `S^{m_a}`.

use std::collections::HashMap;

use num_traits::Zero;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gaudin::{diag_casimirs, quadratic_family, OperatorFamily, Provenance, SitePoints};
use crate::limits::bending_quadratic_family;
use crate::opcore::linop::LinOp;
use crate::opcore::span::in_span;
use crate::repspace::{monomials, symmetric_tensor_space, TensorSpace};
use crate::scalar::{format_rational, int, Rational};
use crate::speclab::{compare_lattices, joint_spectrum, LatticeComparison, SpectrumStatus};

#[derive(Clone, Debug)]
pub struct PolySpace {
    n: usize,
    m: usize,
    d: usize,
    /// Exponents, flattened row-major: `x_{ia}` at `i·M + a`.
    monos: Vec<Vec<usize>>,
    index: HashMap<Vec<usize>, usize>,
}

impl PolySpace {
    pub fn new(n: usize, m: usize, d: usize) -> Result<Self> {
        if n == 0 || m == 0 {
            return Err(Error::InvalidArgument("N and M must be positive".into()));
        }
        let monos = monomials(n * m, d);
        let index = monos.iter().cloned().enumerate().map(|(i, a)| (a, i)).collect();
        Ok(PolySpace { n, m, d, monos, index })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn degree(&self) -> usize {
        self.d
    }

    pub fn dim(&self) -> usize {
        self.monos.len()
    }

    pub fn monomial(&self, k: usize) -> &[usize] {
        &self.monos[k]
    }

    fn var(&self, i: usize, a: usize) -> usize {
        i * self.m + a
    }

    /// `Σ x_p ∂_q` over the given flattened variable pairs.
    fn polarization(&self, pairs: &[(usize, usize)]) -> LinOp<Rational> {
        let mut trip = Vec::new();
        for (col, alpha) in self.monos.iter().enumerate() {
            for &(p, q) in pairs {
                if alpha[q] == 0 {
                    continue;
                }
                let mut beta = alpha.clone();
                beta[q] -= 1;
                beta[p] += 1;
                trip.push((self.index[&beta], col, int(alpha[q] as i64)));
            }
        }
        LinOp::from_triplets(self.dim(), trip)
    }

    /// `ρ_N(E_ij)`.
    pub fn rho_n(&self, i: usize, j: usize) -> LinOp<Rational> {
        let pairs: Vec<_> = (0..self.m).map(|a| (self.var(i, a), self.var(j, a))).collect();
        self.polarization(&pairs)
    }

    /// `ρ_M(E_ab)`.
    pub fn rho_m(&self, a: usize, b: usize) -> LinOp<Rational> {
        let pairs: Vec<_> = (0..self.n).map(|i| (self.var(i, a), self.var(i, b))).collect();
        self.polarization(&pairs)
    }

    /// `x_{ia} ∂_{ja}`: the `E_ij` action on column `a` alone.
    pub fn column_op(&self, a: usize, i: usize, j: usize) -> LinOp<Rational> {
        self.polarization(&[(self.var(i, a), self.var(j, a))])
    }

    pub fn column_degrees(&self, k: usize) -> Vec<usize> {
        (0..self.m).map(|a| (0..self.n).map(|i| self.monos[k][self.var(i, a)]).sum()).collect()
    }
}

/// Weak compositions of `d` into `m` parts, reverse lex.
pub fn compositions(d: usize, m: usize) -> Vec<Vec<usize>> {
    monomials(m, d)
}

/// One multidegree component and its identification with a tensor space.
#[derive(Clone, Debug)]
pub struct Component {
    pub degrees: Vec<usize>,
    pub tensor: TensorSpace<Rational>,
    /// Poly-space index of each tensor basis vector.
    pub poly_index: Vec<usize>,
}

pub fn multidegree_component(space: &PolySpace, degrees: &[usize]) -> Result<Component> {
    if degrees.len() != space.m || degrees.iter().sum::<usize>() != space.d {
        return Err(Error::InvalidArgument(format!("multidegree {degrees:?} does not fit M = {}, d = {}", space.m, space.d)));
    }
    let tensor = symmetric_tensor_space(space.n, degrees)?;
    let site_index: Vec<HashMap<Vec<usize>, usize>> =
        degrees.iter().map(|&ma| monomials(space.n, ma).into_iter().enumerate().map(|(i, a)| (a, i)).collect()).collect();
    let mut poly_index = vec![usize::MAX; tensor.dim()];
    for (k, alpha) in space.monos.iter().enumerate() {
        if space.column_degrees(k) != degrees {
            continue;
        }
        let digits: Vec<usize> = (0..space.m)
            .map(|a| {
                let col: Vec<usize> = (0..space.n).map(|i| alpha[space.var(i, a)]).collect();
                site_index[a][&col]
            })
            .collect();
        poly_index[tensor.encode(&digits)] = k;
    }
    debug_assert!(poly_index.iter().all(|&k| k != usize::MAX));
    Ok(Component { degrees: degrees.to_vec(), tensor, poly_index })
}

impl Component {
    /// Carry an operator on the tensor space to the poly space (zero off the component).
    pub fn transport(&self, dim: usize, op: &LinOp<Rational>) -> LinOp<Rational> {
        LinOp::from_triplets(dim, op.entries().into_iter().map(|(r, c, v)| (self.poly_index[r], self.poly_index[c], v)))
    }

    /// Does every site generator agree with the column action through the bijection?
    pub fn agrees(&self, space: &PolySpace) -> bool {
        let keep: std::collections::HashSet<usize> = self.poly_index.iter().copied().collect();
        (0..space.m).all(|a| {
            (0..space.n).all(|i| {
                (0..space.n).all(|j| {
                    let mine = self.transport(space.dim(), self.tensor.site_op(a, i, j));
                    let col = space.column_op(a, i, j);
                    // restrict the column action to this component
                    let col_here = LinOp::from_triplets(space.dim(), col.entries().into_iter().filter(|(_, c, _)| keep.contains(c)));
                    mine == col_here
                })
            })
        })
    }
}

pub fn components(space: &PolySpace) -> Result<Vec<Component>> {
    compositions(space.d, space.m).iter().map(|m| multidegree_component(space, m)).collect()
}

/// Build a family on every component and sum the transported blocks.
/// Members are matched by label; every component must produce the same labels.
pub fn transport_family(
    space: &PolySpace,
    comps: &[Component],
    build: impl Fn(&TensorSpace<Rational>) -> Result<OperatorFamily<Rational>>,
) -> Result<OperatorFamily<Rational>> {
    let dim = space.dim();
    let mut acc: Vec<(String, Provenance, LinOp<Rational>)> = Vec::new();
    for (ci, comp) in comps.iter().enumerate() {
        let fam = build(&comp.tensor)?;
        if ci == 0 {
            acc = fam.members().iter().map(|m| (m.label.clone(), m.provenance.clone(), LinOp::zeros(dim))).collect();
        }
        if fam.labels() != acc.iter().map(|a| a.0.clone()).collect::<Vec<_>>() {
            return Err(Error::InvalidArgument("components produced different member labels".into()));
        }
        for (slot, m) in acc.iter_mut().zip(fam.members()) {
            slot.2 = slot.2.try_add(&comp.transport(dim, &m.op))?;
        }
    }
    let mut out = OperatorFamily::new(dim);
    for (l, p, op) in acc {
        out.push(l, op, p);
    }
    Ok(out)
}

/// `Q_Z(e_c) = Σ_{a<b} (δ_ac − δ_bc)/(z_a − z_b) ρ_M(E_ab) ρ_M(E_ba)`, `c = 1..M`.
pub fn qz_elements(space: &PolySpace, z: &SitePoints) -> Result<OperatorFamily<Rational>> {
    if z.len() != space.m {
        return Err(Error::InvalidArgument(format!("{} points for M = {}", z.len(), space.m)));
    }
    let zs = z.values();
    let mut prods: HashMap<(usize, usize), LinOp<Rational>> = HashMap::new();
    for a in 0..space.m {
        for b in a + 1..space.m {
            prods.insert((a, b), space.rho_m(a, b).try_mul(&space.rho_m(b, a))?);
        }
    }
    let mut fam = OperatorFamily::new(space.dim());
    for c in 0..space.m {
        let mut q = LinOp::zeros(space.dim());
        for ((a, b), p) in &prods {
            let w = int((*a == c) as i64 - (*b == c) as i64);
            if !w.is_zero() {
                q = q.try_axpy(&(w / (&zs[*a] - &zs[*b])), p)?;
            }
        }
        fam.push(format!("Q_{}", c + 1), q, Provenance::Qz { index: c + 1 });
    }
    Ok(fam)
}

/// Which nested `gl_k ⊂ gl_M` chain: indices `{1..k}` or `{M−k+1..M}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Chain {
    Leading,
    Trailing,
}

/// `C_k^{(l)} = Σ_{i_1..i_l ∈ S_k} ρ_M(E_{i_1 i_2}) ⋯ ρ_M(E_{i_l i_1})`,
/// `l = 1..k`, over the chain sets `S_1 ⊂ … ⊂ S_{max_k}`.
pub fn gt_casimirs(space: &PolySpace, max_k: usize, chain: Chain) -> Result<OperatorFamily<Rational>> {
    if max_k == 0 || max_k > space.m {
        return Err(Error::InvalidArgument(format!("chain length {max_k} outside 1..={}", space.m)));
    }
    let m = space.m;
    let e: Vec<LinOp<Rational>> = (0..m * m).map(|k| space.rho_m(k / m, k % m)).collect();
    let mut fam = OperatorFamily::new(space.dim());
    for k in 1..=max_k {
        let set: Vec<usize> = match chain {
            Chain::Leading => (0..k).collect(),
            Chain::Trailing => (m - k..m).collect(),
        };
        // power[a][b] = (E^l)_{ab} restricted to the set
        let mut power: Vec<Vec<LinOp<Rational>>> = set.iter().map(|&a| set.iter().map(|&b| e[a * m + b].clone()).collect()).collect();
        for l in 1..=k {
            if l > 1 {
                let mut next = Vec::with_capacity(k);
                for ia in 0..k {
                    let mut row = Vec::with_capacity(k);
                    for &b in &set {
                        let mut acc = LinOp::zeros(space.dim());
                        for (ic, &c) in set.iter().enumerate() {
                            acc = acc.try_add(&power[ia][ic].try_mul(&e[c * m + b])?)?;
                        }
                        row.push(acc);
                    }
                    next.push(row);
                }
                power = next;
            }
            let mut tr = LinOp::zeros(space.dim());
            for (i, row) in power.iter().enumerate() {
                tr = tr.try_add(&row[i])?;
            }
            let label = match chain {
                Chain::Leading => format!("C_{k}^({l})"),
                Chain::Trailing => format!("C'_{k}^({l})"),
            };
            fam.push(label, tr, Provenance::GtCasimir { k, l });
        }
    }
    Ok(fam)
}

/// `ρ_M(E_cc)`, `c = 1..M`, and the identity.
pub fn cartan_and_identity(space: &PolySpace) -> OperatorFamily<Rational> {
    let mut fam = OperatorFamily::new(space.dim());
    for c in 0..space.m {
        fam.push(format!("E_{0}{0}", c + 1), space.rho_m(c, c), Provenance::Cartan { a: c + 1 });
    }
    fam.push("Id", LinOp::identity(space.dim()), Provenance::Identity);
    fam
}

#[derive(Clone, Debug, Serialize)]
pub struct Expansion {
    pub target: String,
    pub in_span: bool,
    /// `(basis label, coefficient)` for nonzero coefficients.
    pub coefficients: Vec<(String, String)>,
}

#[derive(Clone, Debug, Serialize)]
pub struct DualityCheck {
    pub n: usize,
    pub m: usize,
    pub d: usize,
    pub z: Vec<String>,
    pub components: usize,
    pub bijection_exact: bool,
    pub gaudin_in_qz_span: Vec<Expansion>,
    pub qz_in_gaudin_span: Vec<Expansion>,
    pub passed: bool,
}

fn expand(target: &OperatorFamily<Rational>, basis: &OperatorFamily<Rational>) -> Result<Vec<Expansion>> {
    let ops = basis.ops();
    let labels = basis.labels();
    target
        .members()
        .iter()
        .map(|m| {
            let r = in_span(&m.op, &ops)?;
            let coefficients = r
                .coefficients
                .map(|cs| cs.iter().zip(&labels).filter(|(c, _)| !c.is_zero()).map(|(c, l)| (l.clone(), format_rational(c))).collect())
                .unwrap_or_default();
            Ok(Expansion { target: m.label.clone(), in_span: r.member, coefficients })
        })
        .collect()
}

/// The transported `gl_N` Gaudin quadratics `H_a` against
/// `span{Q_Z(e_c), ρ_M(E_cc), Id}`, in both directions, exactly.
pub fn duality_check(space: &PolySpace, z: &SitePoints) -> Result<DualityCheck> {
    let comps = components(space)?;
    let bijection_exact = comps.iter().all(|c| c.agrees(space));
    let h = transport_family(space, &comps, |t| quadratic_family(t, z))?;
    let q = qz_elements(space, z)?;
    let corr = cartan_and_identity(space);
    let mut qb = q.clone();
    qb.extend(corr.clone());
    let mut hb = h.clone();
    hb.extend(corr);
    let gaudin_in_qz_span = expand(&h, &qb)?;
    let qz_in_gaudin_span = expand(&q, &hb)?;
    let passed = bijection_exact && gaudin_in_qz_span.iter().chain(&qz_in_gaudin_span).all(|e| e.in_span);
    Ok(DualityCheck {
        n: space.n,
        m: space.m,
        d: space.d,
        z: z.to_strings(),
        components: comps.len(),
        bijection_exact,
        gaudin_in_qz_span,
        qz_in_gaudin_span,
        passed,
    })
}

/// `Tr (E^{(a)})^l`, `l = 1..N`, at every site.
pub fn site_casimirs(space: &TensorSpace<Rational>) -> Result<OperatorFamily<Rational>> {
    let mut fam = OperatorFamily::new(space.dim());
    for a in 0..space.n_sites() {
        let single = TensorSpace::new(vec![space.factor(a).clone()])?;
        for m in diag_casimirs(&single).members() {
            let mut factors_left = 1;
            for f in &space.site_dims()[..a] {
                factors_left *= f;
            }
            let right = space.dim() / (factors_left * single.dim());
            let op = m.op.embed(factors_left, right);
            let l = match m.provenance {
                Provenance::DiagonalCasimir { l } => l,
                _ => unreachable!(),
            };
            let provenance = Provenance::Lifted { first_site: a + 1, source: "site".into(), inner: Box::new(m.provenance.clone()) };
            fam.push(format!("C_{l}^[{}]", a + 1), op, provenance);
        }
    }
    Ok(fam)
}

#[derive(Clone, Debug, Serialize)]
pub struct GtMatch {
    pub n: usize,
    pub m: usize,
    pub d: usize,
    pub chain: Chain,
    pub bending_tuples: usize,
    pub gt_tuples: usize,
    pub bending_status: SpectrumStatus,
    pub gt_status: SpectrumStatus,
    pub lattice: LatticeComparison,
    pub passed: bool,
}

pub const PROJECTOR_TOL: f64 = 1e-8;

/// Joint eigenspaces of the transported bending family (with sitewise and
/// diagonal Casimirs) against those of the Gelfand–Tsetlin Casimirs of the
/// trailing chain.
pub fn gt_match_check(space: &PolySpace, seed: u64) -> Result<GtMatch> {
    let comps = components(space)?;
    let chain = Chain::Trailing;
    let bending = transport_family(space, &comps, |t| {
        let mut f = if t.n_sites() > 1 { bending_quadratic_family(t)? } else { OperatorFamily::new(t.dim()) };
        f.extend(site_casimirs(t)?);
        f.extend(diag_casimirs(t));
        Ok(f)
    })?;
    let gt = gt_casimirs(space, space.m, chain)?;
    let a = joint_spectrum(&bending.to_field::<num_complex::Complex64>(), seed)?;
    let b = joint_spectrum(&gt.to_field::<num_complex::Complex64>(), seed)?;
    let lattice = compare_lattices(&a, &b, PROJECTOR_TOL);
    Ok(GtMatch {
        n: space.n,
        m: space.m,
        d: space.d,
        chain,
        bending_tuples: a.tuples.len(),
        gt_tuples: b.tuples.len(),
        bending_status: a.status,
        gt_status: b.status,
        passed: lattice.same,
        lattice,
    })
}

//! Truncated Laurent series with noncommutative coefficients, and
//! differential operators in `∂` whose coefficients are such series.
//!
//! A series stores exponents `lo..=hi`. Besides the window it tracks
//! `valid_hi`: coefficients above it may be missing contributions from the
//! truncated tail of the inputs. Products and derivatives update it, so a
//! caller can tell whether the coefficients it reads are exact.

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::opcore::linop::LinOp;
use crate::scalar::{int, Rational, Scalar};

/// Coefficient ring for [`TruncLaurent`]: an associative algebra over the rationals.
pub trait SeriesCoeff: Clone + Send + Sync + PartialEq {
    fn zero_like(&self) -> Self;
    fn is_zero_coeff(&self) -> bool;
    fn add_coeff(&self, other: &Self) -> Self;
    fn mul_coeff(&self, other: &Self) -> Self;
    fn scale_q(&self, q: &Rational) -> Self;
}

impl<T: Scalar> SeriesCoeff for LinOp<T> {
    fn zero_like(&self) -> Self {
        LinOp::zeros(self.dim())
    }
    fn is_zero_coeff(&self) -> bool {
        self.is_zero()
    }
    fn add_coeff(&self, other: &Self) -> Self {
        self.try_add(other).expect("series coefficients share a dimension")
    }
    fn mul_coeff(&self, other: &Self) -> Self {
        self.try_mul(other).expect("series coefficients share a dimension")
    }
    fn scale_q(&self, q: &Rational) -> Self {
        self.scale(&T::from_rational(q))
    }
}

impl SeriesCoeff for Rational {
    fn zero_like(&self) -> Self {
        Rational::zero()
    }
    fn is_zero_coeff(&self) -> bool {
        self.is_zero()
    }
    fn add_coeff(&self, other: &Self) -> Self {
        self + other
    }
    fn mul_coeff(&self, other: &Self) -> Self {
        self * other
    }
    fn scale_q(&self, q: &Rational) -> Self {
        self * q
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TruncLaurent<C> {
    base: Rational,
    lo: i32,
    hi: i32,
    valid_hi: i32,
    coeffs: Vec<C>,
    zero: C,
}

impl<C: SeriesCoeff> TruncLaurent<C> {
    /// The zero series on window `[lo, hi]`, exact everywhere.
    pub fn zero(base: Rational, lo: i32, hi: i32, zero: C) -> Self {
        assert!(lo <= hi);
        let coeffs = vec![zero.clone(); (hi - lo + 1) as usize];
        TruncLaurent { base, lo, hi, valid_hi: hi, coeffs, zero }
    }

    pub fn constant(base: Rational, lo: i32, hi: i32, c: C) -> Self {
        let zero = c.zero_like();
        let mut s = Self::zero(base, lo, hi, zero);
        s.set(0, c);
        s
    }

    pub fn base(&self) -> &Rational {
        &self.base
    }

    pub fn window(&self) -> (i32, i32) {
        (self.lo, self.hi)
    }

    pub fn valid_hi(&self) -> i32 {
        self.valid_hi
    }

    pub fn with_valid_hi(mut self, v: i32) -> Self {
        self.valid_hi = v.min(self.hi);
        self
    }

    /// Coefficient of `u^e`, zero outside the window.
    pub fn coeff(&self, e: i32) -> &C {
        if e < self.lo || e > self.hi {
            &self.zero
        } else {
            &self.coeffs[(e - self.lo) as usize]
        }
    }

    pub fn set(&mut self, e: i32, c: C) {
        assert!(e >= self.lo && e <= self.hi, "exponent {e} outside window");
        self.coeffs[(e - self.lo) as usize] = c;
    }

    /// Lowest exponent with a nonzero coefficient.
    pub fn order(&self) -> Option<i32> {
        self.coeffs.iter().position(|c| !c.is_zero_coeff()).map(|p| p as i32 + self.lo)
    }

    pub fn is_zero(&self) -> bool {
        self.order().is_none()
    }

    fn check_same(&self, other: &Self) {
        assert!(self.base == other.base && self.lo == other.lo && self.hi == other.hi, "series windows differ");
    }

    pub fn add(&self, other: &Self) -> Self {
        self.check_same(other);
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a.add_coeff(b)).collect();
        TruncLaurent { coeffs, valid_hi: self.valid_hi.min(other.valid_hi), ..self.clone() }
    }

    pub fn scale(&self, q: &Rational) -> Self {
        TruncLaurent { coeffs: self.coeffs.iter().map(|c| c.scale_q(q)).collect(), ..self.clone() }
    }

    pub fn neg(&self) -> Self {
        self.scale(&int(-1))
    }

    /// Product in coefficient order `self * other`.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_same(other);
        let mut out = Self::zero(self.base.clone(), self.lo, self.hi, self.zero.clone());
        let (Some(oa), Some(ob)) = (self.order(), other.order()) else {
            return Ok(out);
        };
        out.valid_hi = (self.valid_hi + ob).min(other.valid_hi + oa).min(self.hi);
        for ea in oa..=self.hi {
            let a = self.coeff(ea);
            if a.is_zero_coeff() {
                continue;
            }
            for eb in ob..=self.hi {
                let e = ea + eb;
                if e > self.hi {
                    break;
                }
                let b = other.coeff(eb);
                if b.is_zero_coeff() {
                    continue;
                }
                let p = a.mul_coeff(b);
                if p.is_zero_coeff() {
                    continue;
                }
                if e < self.lo {
                    return Err(Error::Truncation { lo: self.lo, hi: self.hi, required_lo: e, required_hi: self.hi });
                }
                let idx = (e - self.lo) as usize;
                out.coeffs[idx] = out.coeffs[idx].add_coeff(&p);
            }
        }
        Ok(out)
    }

    /// `d/du`.
    pub fn derivative(&self) -> Result<Self> {
        let mut out = Self::zero(self.base.clone(), self.lo, self.hi, self.zero.clone());
        for e in self.lo..=self.hi {
            let c = self.coeff(e);
            if e == 0 || c.is_zero_coeff() {
                continue;
            }
            if e - 1 < self.lo {
                return Err(Error::Truncation { lo: self.lo, hi: self.hi, required_lo: e - 1, required_hi: self.hi });
            }
            out.set(e - 1, c.scale_q(&int(e as i64)));
        }
        out.valid_hi = self.valid_hi - 1;
        Ok(out)
    }

    pub fn nth_derivative(&self, r: usize) -> Result<Self> {
        let mut s = self.clone();
        for _ in 0..r {
            s = s.derivative()?;
        }
        Ok(s)
    }
}

/// `Σ_d coeff[d] ∂^d`, coefficients written to the left of `∂`.
#[derive(Clone, Debug, PartialEq)]
pub struct DiffOp<C> {
    coeffs: Vec<TruncLaurent<C>>,
}

fn binomial(n: usize, k: usize) -> Rational {
    let mut r = Rational::one();
    for i in 0..k {
        r = r * int((n - i) as i64) / int((i + 1) as i64);
    }
    r
}

impl<C: SeriesCoeff> DiffOp<C> {
    pub fn new(coeffs: Vec<TruncLaurent<C>>) -> Self {
        assert!(!coeffs.is_empty());
        DiffOp { coeffs }
    }

    /// `δ·∂ − a` for a series `a`; `unit` is the coefficient ring's identity.
    pub fn first_order(a: &TruncLaurent<C>, with_derivative: bool, unit: &C) -> Self {
        let (lo, hi) = a.window();
        let mut coeffs = vec![a.neg()];
        if with_derivative {
            coeffs.push(TruncLaurent::constant(a.base().clone(), lo, hi, unit.clone()));
        }
        DiffOp { coeffs }
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeff(&self, d: usize) -> &TruncLaurent<C> {
        &self.coeffs[d]
    }

    pub fn coeffs(&self) -> &[TruncLaurent<C>] {
        &self.coeffs
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        let template = &self.coeffs[0];
        let zero = || {
            let (lo, hi) = template.window();
            TruncLaurent::zero(template.base().clone(), lo, hi, template.coeff(template.window().0).zero_like())
        };
        let coeffs = (0..n)
            .map(|d| match (self.coeffs.get(d), other.coeffs.get(d)) {
                (Some(a), Some(b)) => a.add(b),
                (Some(a), None) => a.clone(),
                (None, Some(b)) => b.clone(),
                (None, None) => zero(),
            })
            .collect();
        DiffOp { coeffs }
    }

    pub fn scale(&self, q: &Rational) -> Self {
        DiffOp { coeffs: self.coeffs.iter().map(|c| c.scale(q)).collect() }
    }

    /// `self ∘ other` using `∂^i ∘ q = Σ_r C(i,r) q^{(r)} ∂^{i−r}`.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        let template = &self.coeffs[0];
        let (lo, hi) = template.window();
        let zero_c = template.coeff(lo).zero_like();
        let order = self.order() + other.order();
        let mut out: Vec<TruncLaurent<C>> =
            (0..=order).map(|_| TruncLaurent::zero(template.base().clone(), lo, hi, zero_c.clone())).collect();
        for (i, p) in self.coeffs.iter().enumerate() {
            if p.is_zero() {
                continue;
            }
            for (j, q) in other.coeffs.iter().enumerate() {
                if q.is_zero() {
                    continue;
                }
                let mut qr = q.clone();
                for r in 0..=i {
                    if r > 0 {
                        qr = qr.derivative()?;
                    }
                    let term = p.mul(&qr)?.scale(&binomial(i, r));
                    let d = i + j - r;
                    out[d] = out[d].add(&term);
                }
            }
        }
        Ok(DiffOp { coeffs: out })
    }

    /// The smallest `valid_hi` over all coefficients.
    pub fn valid_hi(&self) -> i32 {
        self.coeffs.iter().map(TruncLaurent::valid_hi).min().unwrap()
    }
}

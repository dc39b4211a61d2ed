//! Scalar fields the operator kernel is generic over.
//!
//! Two fields are supported: exact rationals (`BigRational`, always kept in
//! lowest terms with a positive denominator) and floating point (`f64` or
//! `Complex64`). Exact values convert to floats; there is no conversion in
//! the other direction.

use std::fmt::Debug;
use std::ops::Neg;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Num, One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Rational = BigRational;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Field {
    ExactRational,
    ComplexFloat64,
}

pub trait Scalar: Num + Clone + Debug + Neg<Output = Self> + Send + Sync + 'static {
    const FIELD: Field;

    fn from_rational(q: &Rational) -> Self;

    fn from_int(v: i64) -> Self {
        Self::from_rational(&Rational::from_integer(BigInt::from(v)))
    }

    fn to_c64(&self) -> Complex64;

    /// Inverse of `to_c64` for float fields; `None` for exact fields.
    fn from_c64(c: Complex64) -> Option<Self>;

    /// The exact value for exact fields; `None` for float fields.
    fn exact_value(&self) -> Option<Rational>;

    fn magnitude(&self) -> f64 {
        self.to_c64().norm()
    }

    /// Exact fields test for zero, float fields for `|x| <= tol`.
    fn negligible(&self, tol: f64) -> bool;

    fn conj(&self) -> Self;

    /// `acc += a * b`
    fn mul_add_to(acc: &mut Self, a: &Self, b: &Self);

    fn mul_ref(a: &Self, b: &Self) -> Self;

    fn add_ref(a: &Self, b: &Self) -> Self;

    fn is_exact() -> bool {
        Self::FIELD == Field::ExactRational
    }
}

impl Scalar for Rational {
    const FIELD: Field = Field::ExactRational;

    fn from_rational(q: &Rational) -> Self {
        q.clone()
    }

    fn from_int(v: i64) -> Self {
        Rational::from_integer(BigInt::from(v))
    }

    fn to_c64(&self) -> Complex64 {
        Complex64::new(rational_to_f64(self), 0.0)
    }

    fn from_c64(_: Complex64) -> Option<Self> {
        None
    }

    fn exact_value(&self) -> Option<Rational> {
        Some(self.clone())
    }

    fn magnitude(&self) -> f64 {
        rational_to_f64(self).abs()
    }

    fn negligible(&self, _tol: f64) -> bool {
        self.is_zero()
    }

    fn conj(&self) -> Self {
        self.clone()
    }

    fn mul_add_to(acc: &mut Self, a: &Self, b: &Self) {
        if a.is_integer() && b.is_integer() && acc.is_integer() {
            let p = a.numer() * b.numer() + acc.numer();
            *acc = Rational::from_integer(p);
        } else {
            *acc += a * b;
        }
    }

    fn mul_ref(a: &Self, b: &Self) -> Self {
        a * b
    }

    fn add_ref(a: &Self, b: &Self) -> Self {
        a + b
    }
}

impl Scalar for f64 {
    const FIELD: Field = Field::ComplexFloat64;

    fn from_rational(q: &Rational) -> Self {
        rational_to_f64(q)
    }

    fn from_int(v: i64) -> Self {
        v as f64
    }

    fn to_c64(&self) -> Complex64 {
        Complex64::new(*self, 0.0)
    }

    fn from_c64(c: Complex64) -> Option<Self> {
        Some(c.re)
    }

    fn exact_value(&self) -> Option<Rational> {
        None
    }

    fn magnitude(&self) -> f64 {
        self.abs()
    }

    fn negligible(&self, tol: f64) -> bool {
        self.abs() <= tol
    }

    fn conj(&self) -> Self {
        *self
    }

    fn mul_add_to(acc: &mut Self, a: &Self, b: &Self) {
        *acc += a * b;
    }

    fn mul_ref(a: &Self, b: &Self) -> Self {
        a * b
    }

    fn add_ref(a: &Self, b: &Self) -> Self {
        a + b
    }
}

impl Scalar for Complex64 {
    const FIELD: Field = Field::ComplexFloat64;

    fn from_rational(q: &Rational) -> Self {
        Complex64::new(rational_to_f64(q), 0.0)
    }

    fn from_int(v: i64) -> Self {
        Complex64::new(v as f64, 0.0)
    }

    fn to_c64(&self) -> Complex64 {
        *self
    }

    fn from_c64(c: Complex64) -> Option<Self> {
        Some(c)
    }

    fn exact_value(&self) -> Option<Rational> {
        None
    }

    fn negligible(&self, tol: f64) -> bool {
        self.norm() <= tol
    }

    fn conj(&self) -> Self {
        Complex64::conj(self)
    }

    fn mul_add_to(acc: &mut Self, a: &Self, b: &Self) {
        *acc += a * b;
    }

    fn mul_ref(a: &Self, b: &Self) -> Self {
        a * b
    }

    fn add_ref(a: &Self, b: &Self) -> Self {
        a + b
    }
}

/// Nearest f64 to `q`, robust to numerators and denominators beyond f64 range.
pub fn rational_to_f64(q: &Rational) -> f64 {
    if let (Some(n), Some(d)) = (q.numer().to_f64(), q.denom().to_f64()) {
        if n.is_finite() && d.is_finite() && d != 0.0 {
            return n / d;
        }
    }
    let shift = q.numer().bits() as i64 - q.denom().bits() as i64;
    let scaled = if shift > 60 {
        q / Rational::from_integer(BigInt::one() << (shift - 60) as usize)
    } else if shift < -60 {
        q * Rational::from_integer(BigInt::one() << (-shift - 60) as usize)
    } else {
        q.clone()
    };
    let base = scaled.numer().to_f64().unwrap_or(f64::NAN) / scaled.denom().to_f64().unwrap_or(f64::NAN);
    if shift > 60 {
        base * 2f64.powi((shift - 60) as i32)
    } else if shift < -60 {
        base / 2f64.powi((-shift - 60) as i32)
    } else {
        base
    }
}

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Formats as `p/q` with an explicit denominator, `0/1` for zero.
pub fn format_rational(q: &Rational) -> String {
    format!("{}/{}", q.numer(), q.denom())
}

/// Parses `p/q`, a plain integer, or a finite decimal such as `-0.125`.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let t = s.trim();
    let err = || Error::ParseRational(s.to_string());
    if t.is_empty() {
        return Err(err());
    }
    if let Some((p, q)) = t.split_once('/') {
        let p = BigInt::from_str_radix(p.trim(), 10).map_err(|_| err())?;
        let q = BigInt::from_str_radix(q.trim(), 10).map_err(|_| err())?;
        if q.is_zero() {
            return Err(err());
        }
        return Ok(Rational::new(p, q));
    }
    let (mantissa, exponent) = match t.find(['e', 'E']) {
        Some(pos) => (&t[..pos], t[pos + 1..].parse::<i32>().map_err(|_| err())?),
        None => (t, 0),
    };
    let (neg, body) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (whole, frac) = body.split_once('.').unwrap_or((body, ""));
    if whole.is_empty() && frac.is_empty() {
        return Err(err());
    }
    if !whole.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return Err(err());
    }
    let digits = format!("{whole}{frac}");
    let mut value = Rational::new(
        BigInt::from_str_radix(&digits, 10).map_err(|_| err())?,
        num_traits::pow(BigInt::from(10), frac.len()),
    );
    let ten = int(10);
    if exponent >= 0 {
        value *= num_traits::pow(ten, exponent as usize);
    } else {
        value /= num_traits::pow(ten, (-exponent) as usize);
    }
    Ok(if neg { -value } else { value })
}

/// Scales a rational vector to integers with content 1 (gcd of entries 1).
pub fn primitive_integer_vector(v: &[Rational]) -> Vec<Rational> {
    let mut lcm = BigInt::one();
    for x in v {
        if !x.is_zero() {
            lcm = lcm.lcm(x.denom());
        }
    }
    let scaled: Vec<BigInt> = v.iter().map(|x| (x * Rational::from_integer(lcm.clone())).to_integer()).collect();
    let mut g = BigInt::zero();
    for x in &scaled {
        g = g.gcd(x);
    }
    if g.is_zero() {
        return v.to_vec();
    }
    let g = g.abs();
    scaled.into_iter().map(|x| Rational::from_integer(x / &g)).collect()
}

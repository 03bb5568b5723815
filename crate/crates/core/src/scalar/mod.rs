//! Scalar fields the polynomial algebra is generic over.
//!
//! Three backends are provided: exact rationals ([`BigRational`]), exact
//! real quadratic fields `Q(√D)` ([`Quad`]) and fixed-precision binary
//! floats ([`BigFloat`]). Exact backends answer zero tests exactly; the
//! float backend treats `|v| <= 2^(-bits/2) * scale` as zero.

mod bigfloat;
mod quadratic;
mod rational;

pub use bigfloat::BigFloat;
pub use num_rational::BigRational;
pub use quadratic::Quad;

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

/// Identifies a scalar backend, e.g. in file headers and CLI flags.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Backend {
    Rational,
    Quadratic(u32),
    BigFloat(u32),
}

impl fmt::Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Backend::Rational => write!(f, "rational"),
            Backend::Quadratic(d) => write!(f, "quad:{d}"),
            Backend::BigFloat(bits) => write!(f, "float:{bits}"),
        }
    }
}

impl FromStr for Backend {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::parse("backend", format!("unknown backend `{s}`"));
        match s.split_once(':') {
            None if s == "rational" => Ok(Backend::Rational),
            Some(("quad", d)) => d.parse().map(Backend::Quadratic).map_err(|_| bad()),
            Some(("float", bits)) => bits.parse().map(Backend::BigFloat).map_err(|_| bad()),
            _ => Err(bad()),
        }
    }
}

/// A field element. All algebra in the crate is written against this trait.
pub trait Scalar:
    Clone
    + fmt::Debug
    + PartialEq
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + for<'a> Add<&'a Self, Output = Self>
    + for<'a> Sub<&'a Self, Output = Self>
    + for<'a> Mul<&'a Self, Output = Self>
    + for<'a> Div<&'a Self, Output = Self>
{
    /// Whether zero tests and equality are exact.
    const EXACT: bool;

    fn backend() -> Backend;
    fn zero() -> Self;
    fn one() -> Self;
    fn from_rational(r: &BigRational) -> Self;

    /// `p + q·√d` if the value lies in this field.
    fn from_quadratic(p: &BigRational, q: &BigRational, d: u32) -> Option<Self>;

    /// `√r` for a non-negative rational, if it lies in this field.
    fn sqrt_rational(r: &BigRational) -> Option<Self>;

    fn is_zero(&self) -> bool;

    /// -1, 0 or 1. Exact for exact backends.
    fn sign(&self) -> i8;

    fn to_f64(&self) -> f64;

    fn to_scalar_string(&self) -> String;
    fn parse_scalar(s: &str) -> Result<Self>;

    /// Relative zero-test tolerance; 0 for exact backends.
    fn tolerance() -> f64 {
        0.0
    }

    /// `tan(qπ/n)`, or `None` when not representable (or vertical).
    fn tan_pi_fraction(q: u32, n: u32) -> Option<Self> {
        match exact_tan(q, n)? {
            ExactTan::Vertical => None,
            ExactTan::Value { p, q, d } => Self::from_quadratic(&p, &q, d),
        }
    }

    fn from_int(v: i64) -> Self {
        Self::from_rational(&BigRational::from_integer(BigInt::from(v)))
    }

    fn from_ratio(num: i64, den: i64) -> Self {
        Self::from_rational(&BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    fn abs(&self) -> Self {
        if self.sign() < 0 {
            -self.clone()
        } else {
            self.clone()
        }
    }

    fn powi(&self, e: u32) -> Self {
        let mut acc = Self::one();
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = base.clone() * &base;
            }
        }
        acc
    }

    /// Zero test used by elimination and residual checks: exact for exact
    /// backends, `|v| <= tolerance * max(scale, 1)` for floats.
    fn is_negligible(&self, scale: f64) -> bool {
        if Self::EXACT {
            self.is_zero()
        } else {
            self.to_f64().abs() <= Self::tolerance() * scale.max(1.0)
        }
    }
}

/// Exact value of `tan(qπ/n)` in `Q(√d)` when it has one.
#[derive(Debug, Clone, PartialEq)]
pub enum ExactTan {
    Vertical,
    /// `p + q·√d`; `d = 1` means rational (`q = 0`).
    Value {
        p: BigRational,
        q: BigRational,
        d: u32,
    },
}

/// Tangents of rational multiples of π that lie in `Q`, `Q(√2)` or `Q(√3)`.
pub fn exact_tan(q: u32, n: u32) -> Option<ExactTan> {
    assert!(n > 0, "denominator must be positive");
    let q = q % n;
    let g = q.gcd(&n);
    let (a, den) = (q / g, n / g);
    let r = |v: i64| BigRational::from_integer(BigInt::from(v));
    let rq = |num: i64, d: i64| BigRational::new(BigInt::from(num), BigInt::from(d));
    let val = |p: BigRational, q: BigRational, d: u32| Some(ExactTan::Value { p, q, d });
    match (den, a) {
        (1, _) => val(r(0), r(0), 1),
        (2, _) => Some(ExactTan::Vertical),
        (3, 1) => val(r(0), r(1), 3),
        (3, 2) => val(r(0), r(-1), 3),
        (4, 1) => val(r(1), r(0), 1),
        (4, 3) => val(r(-1), r(0), 1),
        (6, 1) => val(r(0), rq(1, 3), 3),
        (6, 5) => val(r(0), rq(-1, 3), 3),
        (8, 1) => val(r(-1), r(1), 2),
        (8, 3) => val(r(1), r(1), 2),
        (8, 5) => val(r(-1), r(-1), 2),
        (8, 7) => val(r(1), r(-1), 2),
        (12, 1) => val(r(2), r(-1), 3),
        (12, 5) => val(r(2), r(1), 3),
        (12, 7) => val(r(-2), r(-1), 3),
        (12, 11) => val(r(-2), r(1), 3),
        _ => None,
    }
}

/// Exact square root of a non-negative rational, when it is rational.
pub(crate) fn rational_sqrt(r: &BigRational) -> Option<BigRational> {
    if r.is_negative() {
        return None;
    }
    let int_sqrt = |v: &BigInt| {
        let s = v.sqrt();
        (&s * &s == *v).then_some(s)
    };
    Some(BigRational::new(int_sqrt(r.numer())?, int_sqrt(r.denom())?))
}

pub fn rational_to_string(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let err = || Error::parse("rational scalar", format!("`{s}` is not of the form p/q"));
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let n: BigInt = n.parse().map_err(|_| err())?;
    let d: BigInt = d.parse().map_err(|_| err())?;
    if d.is_zero() {
        return Err(Error::parse("rational scalar", format!("zero denominator in `{s}`")));
    }
    Ok(BigRational::new(n, d))
}

pub(crate) fn rational_to_f64(r: &BigRational) -> f64 {
    use num_traits::ToPrimitive;
    ToPrimitive::to_f64(r).unwrap_or_else(|| {
        // Huge numerators/denominators: scale down by bit shifting.
        let shift = (r.numer().bits().max(r.denom().bits()) as i64 - 1000).max(0) as usize;
        let n = (r.numer() >> shift).to_f64().unwrap_or(f64::NAN);
        let d = (r.denom() >> shift).to_f64().unwrap_or(f64::NAN);
        n / d
    })
}

pub(crate) fn zero_rational() -> BigRational {
    <BigRational as Zero>::zero()
}

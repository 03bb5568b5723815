use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_traits::{Signed, Zero};

use super::{parse_rational, rational_sqrt, rational_to_f64, rational_to_string, Backend, BigRational, Scalar};
use crate::error::{Error, Result};

/// Element `a + b·√D` of the real quadratic field `Q(√D)`.
///
/// `D` must be a square-free integer greater than one; arithmetic is exact
/// and multiplication reduces with `√D·√D = D`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Quad<const D: u32> {
    pub a: BigRational,
    pub b: BigRational,
}

impl<const D: u32> Quad<D> {
    pub fn new(a: BigRational, b: BigRational) -> Self {
        debug_assert!(D > 1 && is_square_free(D), "Quad<{D}> needs a square-free D > 1");
        Quad { a, b }
    }

    pub fn sqrt_d() -> Self {
        Self::new(<BigRational as Zero>::zero(), num_traits::One::one())
    }

    pub fn conj(&self) -> Self {
        Self::new(self.a.clone(), -self.b.clone())
    }

    /// Field norm `a² − D b²`.
    pub fn norm(&self) -> BigRational {
        &self.a * &self.a - &self.b * &self.b * BigRational::from_integer(D.into())
    }
}

pub(crate) fn is_square_free(d: u32) -> bool {
    let mut p = 2u32;
    while p * p <= d {
        if d % (p * p) == 0 {
            return false;
        }
        p += 1;
    }
    true
}

impl<const D: u32> fmt::Debug for Quad<D> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_scalar_string())
    }
}

impl<const D: u32> fmt::Display for Quad<D> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_scalar_string())
    }
}

impl<const D: u32> Add for Quad<D> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Quad { a: self.a + rhs.a, b: self.b + rhs.b }
    }
}

impl<'r, const D: u32> Add<&'r Quad<D>> for Quad<D> {
    type Output = Self;
    fn add(self, rhs: &Self) -> Self {
        Quad { a: self.a + &rhs.a, b: self.b + &rhs.b }
    }
}

impl<const D: u32> Sub for Quad<D> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Quad { a: self.a - rhs.a, b: self.b - rhs.b }
    }
}

impl<'r, const D: u32> Sub<&'r Quad<D>> for Quad<D> {
    type Output = Self;
    fn sub(self, rhs: &Self) -> Self {
        Quad { a: self.a - &rhs.a, b: self.b - &rhs.b }
    }
}

impl<const D: u32> Neg for Quad<D> {
    type Output = Self;
    fn neg(self) -> Self {
        Quad { a: -self.a, b: -self.b }
    }
}

impl<'r, const D: u32> Mul<&'r Quad<D>> for Quad<D> {
    type Output = Self;
    fn mul(self, rhs: &Self) -> Self {
        let d = BigRational::from_integer(D.into());
        Quad {
            a: &self.a * &rhs.a + &self.b * &rhs.b * d,
            b: &self.a * &rhs.b + &self.b * &rhs.a,
        }
    }
}

impl<const D: u32> Mul for Quad<D> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        self * &rhs
    }
}

impl<'r, const D: u32> Div<&'r Quad<D>> for Quad<D> {
    type Output = Self;
    fn div(self, rhs: &Self) -> Self {
        let n = rhs.norm();
        assert!(!Zero::is_zero(&n), "division by zero in Q(sqrt {D})");
        let num = self * &rhs.conj();
        Quad { a: num.a / &n, b: num.b / &n }
    }
}

impl<const D: u32> Div for Quad<D> {
    type Output = Self;
    fn div(self, rhs: Self) -> Self {
        self / &rhs
    }
}

impl<const D: u32> Scalar for Quad<D> {
    const EXACT: bool = true;

    fn backend() -> Backend {
        Backend::Quadratic(D)
    }

    fn zero() -> Self {
        Quad { a: <BigRational as Zero>::zero(), b: <BigRational as Zero>::zero() }
    }

    fn one() -> Self {
        Quad { a: num_traits::One::one(), b: <BigRational as Zero>::zero() }
    }

    fn from_rational(r: &BigRational) -> Self {
        Quad { a: r.clone(), b: <BigRational as Zero>::zero() }
    }

    fn from_quadratic(p: &BigRational, q: &BigRational, d: u32) -> Option<Self> {
        if Zero::is_zero(q) || d == 1 {
            return Some(Quad { a: p + q, b: <BigRational as Zero>::zero() });
        }
        if d == D {
            return Some(Quad::new(p.clone(), q.clone()));
        }
        // √d = k·√D when d/D is a rational square.
        let ratio = BigRational::new(d.into(), D.into());
        let k = rational_sqrt(&ratio)?;
        Some(Quad::new(p.clone(), q * k))
    }

    fn sqrt_rational(r: &BigRational) -> Option<Self> {
        if let Some(s) = rational_sqrt(r) {
            return Some(Self::from_rational(&s));
        }
        let k = rational_sqrt(&(r / BigRational::from_integer(D.into())))?;
        Some(Quad::new(<BigRational as Zero>::zero(), k))
    }

    fn is_zero(&self) -> bool {
        Zero::is_zero(&self.a) && Zero::is_zero(&self.b)
    }

    fn sign(&self) -> i8 {
        let sa = self.a.sign();
        let sb = self.b.sign();
        if sb == 0 || sa == sb {
            return if sa != 0 { sa } else { sb };
        }
        if sa == 0 {
            return sb;
        }
        // Opposite signs: compare a² with D·b².
        let lhs = &self.a * &self.a;
        let rhs = &self.b * &self.b * BigRational::from_integer(D.into());
        match lhs.cmp(&rhs) {
            std::cmp::Ordering::Greater => sa,
            std::cmp::Ordering::Less => sb,
            std::cmp::Ordering::Equal => 0,
        }
    }

    fn to_f64(&self) -> f64 {
        // Evaluate a + b√D as (a² − D b²)/(a − b√D) when that avoids cancellation.
        let a = rational_to_f64(&self.a);
        let b = rational_to_f64(&self.b) * (D as f64).sqrt();
        if a.signum() != b.signum() && a != 0.0 && b != 0.0 {
            let n = rational_to_f64(&self.norm());
            n / (a - b)
        } else {
            a + b
        }
    }

    fn to_scalar_string(&self) -> String {
        let b = rational_to_string(&self.b);
        if Zero::is_zero(&self.b) {
            return rational_to_string(&self.a);
        }
        if Zero::is_zero(&self.a) {
            return format!("{b}*sqrt({D})");
        }
        let sep = if self.b.is_negative() { "" } else { "+" };
        format!("{}{sep}{b}*sqrt({D})", rational_to_string(&self.a))
    }

    fn parse_scalar(s: &str) -> Result<Self> {
        let s = s.trim();
        let Some(head) = s.strip_suffix(&format!("*sqrt({D})")) else {
            // Plain rationals are accepted too.
            if !s.contains("sqrt") {
                return parse_rational(s).map(|r| Self::from_rational(&r));
            }
            return Err(Error::parse("quadratic scalar", format!("`{s}` is not in Q(sqrt({D}))")));
        };
        // Split `p±r` at the last sign that is not the leading one.
        let split = head
            .char_indices()
            .skip(1)
            .filter(|&(_, c)| c == '+' || c == '-')
            .map(|(i, _)| i)
            .last();
        let (p, r) = match split {
            Some(i) => (&head[..i], head[i..].trim_start_matches('+')),
            None => ("0", head),
        };
        Ok(Quad::new(parse_rational(p)?, parse_rational(r)?))
    }
}

use num_traits::{One, Signed, Zero};

use super::{parse_rational, rational_sqrt, rational_to_f64, rational_to_string, Backend, BigRational, Scalar};
use crate::error::Result;

impl Scalar for BigRational {
    const EXACT: bool = true;

    fn backend() -> Backend {
        Backend::Rational
    }

    fn zero() -> Self {
        Zero::zero()
    }

    fn one() -> Self {
        One::one()
    }

    fn from_rational(r: &BigRational) -> Self {
        r.clone()
    }

    fn from_quadratic(p: &BigRational, q: &BigRational, d: u32) -> Option<Self> {
        if Zero::is_zero(q) || d == 1 {
            return Some(p + q);
        }
        let root = rational_sqrt(&BigRational::from_integer(d.into()))?;
        Some(p + q * root)
    }

    fn sqrt_rational(r: &BigRational) -> Option<Self> {
        rational_sqrt(r)
    }

    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }

    fn sign(&self) -> i8 {
        if self.is_positive() {
            1
        } else if self.is_negative() {
            -1
        } else {
            0
        }
    }

    fn to_f64(&self) -> f64 {
        rational_to_f64(self)
    }

    fn to_scalar_string(&self) -> String {
        rational_to_string(self)
    }

    fn parse_scalar(s: &str) -> Result<Self> {
        parse_rational(s)
    }
}

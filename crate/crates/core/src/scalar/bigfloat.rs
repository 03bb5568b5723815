use std::cell::RefCell;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use astro_float::{Consts, Radix, RoundingMode, Sign};

use super::{Backend, BigRational, Scalar};
use crate::error::{Error, Result};

const RM: RoundingMode = RoundingMode::ToEven;

thread_local! {
    static CONSTS: RefCell<Consts> = RefCell::new(Consts::new().expect("astro-float constant cache"));
}

fn with_consts<T>(f: impl FnOnce(&mut Consts) -> T) -> T {
    CONSTS.with(|c| f(&mut c.borrow_mut()))
}

/// Binary floating point number with a fixed `BITS`-bit mantissa.
#[derive(Clone)]
pub struct BigFloat<const BITS: usize>(astro_float::BigFloat);

impl<const BITS: usize> BigFloat<BITS> {
    pub fn inner(&self) -> &astro_float::BigFloat {
        &self.0
    }

    pub fn from_f64(v: f64) -> Self {
        BigFloat(astro_float::BigFloat::from_f64(v, BITS))
    }

    pub fn pi() -> Self {
        BigFloat(with_consts(|cc| cc.pi(BITS, RM)))
    }

    pub fn sqrt(&self) -> Self {
        BigFloat(self.0.sqrt(BITS, RM))
    }

    pub fn tan(&self) -> Self {
        BigFloat(with_consts(|cc| self.0.tan(BITS, RM, cc)))
    }

    pub fn sin(&self) -> Self {
        BigFloat(with_consts(|cc| self.0.sin(BITS, RM, cc)))
    }

    pub fn cos(&self) -> Self {
        BigFloat(with_consts(|cc| self.0.cos(BITS, RM, cc)))
    }

    pub fn atan(&self) -> Self {
        BigFloat(with_consts(|cc| self.0.atan(BITS, RM, cc)))
    }

    fn from_bigint(v: &num_bigint::BigInt) -> astro_float::BigFloat {
        // Parse with enough bits to hold the integer exactly.
        let p = (v.bits() as usize + 64).max(BITS);
        with_consts(|cc| astro_float::BigFloat::parse(&v.to_string(), Radix::Dec, p, RM, cc))
    }
}

impl<const BITS: usize> fmt::Debug for BigFloat<BITS> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_scalar_string())
    }
}

impl<const BITS: usize> fmt::Display for BigFloat<BITS> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_scalar_string())
    }
}

impl<const BITS: usize> PartialEq for BigFloat<BITS> {
    fn eq(&self, other: &Self) -> bool {
        self.0 == other.0
    }
}

macro_rules! bin_op {
    ($tr:ident, $method:ident) => {
        impl<const BITS: usize> $tr for BigFloat<BITS> {
            type Output = Self;
            fn $method(self, rhs: Self) -> Self {
                BigFloat(self.0.$method(&rhs.0, BITS, RM))
            }
        }

        impl<'r, const BITS: usize> $tr<&'r BigFloat<BITS>> for BigFloat<BITS> {
            type Output = Self;
            fn $method(self, rhs: &Self) -> Self {
                BigFloat(self.0.$method(&rhs.0, BITS, RM))
            }
        }
    };
}

bin_op!(Add, add);
bin_op!(Sub, sub);
bin_op!(Mul, mul);
bin_op!(Div, div);

impl<const BITS: usize> Neg for BigFloat<BITS> {
    type Output = Self;
    fn neg(self) -> Self {
        BigFloat(-self.0)
    }
}

impl<const BITS: usize> Scalar for BigFloat<BITS> {
    const EXACT: bool = false;

    fn backend() -> Backend {
        Backend::BigFloat(BITS as u32)
    }

    fn zero() -> Self {
        BigFloat(astro_float::BigFloat::from_word(0, BITS))
    }

    fn one() -> Self {
        BigFloat(astro_float::BigFloat::from_word(1, BITS))
    }

    fn from_rational(r: &BigRational) -> Self {
        let n = Self::from_bigint(r.numer());
        let d = Self::from_bigint(r.denom());
        BigFloat(n.div(&d, BITS, RM))
    }

    fn from_quadratic(p: &BigRational, q: &BigRational, d: u32) -> Option<Self> {
        let root = BigFloat::<BITS>(astro_float::BigFloat::from_word(d as u64, BITS)).sqrt();
        Some(Self::from_rational(p) + Self::from_rational(q) * root)
    }

    fn sqrt_rational(r: &BigRational) -> Option<Self> {
        (r >= &super::zero_rational()).then(|| Self::from_rational(r).sqrt())
    }

    fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    fn sign(&self) -> i8 {
        if self.0.is_zero() {
            0
        } else if self.0.is_negative() {
            -1
        } else {
            1
        }
    }

    fn to_f64(&self) -> f64 {
        let Some((words, _, sign, exp, _)) = self.0.as_raw_parts() else {
            return f64::NAN;
        };
        if self.0.is_zero() {
            return 0.0;
        }
        // Value is 0.mantissa · 2^exp with the mantissa normalized in the top word.
        let top = *words.last().unwrap_or(&0) as f64;
        let next = if words.len() > 1 { words[words.len() - 2] as f64 } else { 0.0 };
        let frac = (top + next / 18446744073709551616.0) / 18446744073709551616.0;
        let v = frac * 2f64.powi(exp);
        if sign == Sign::Neg {
            -v
        } else {
            v
        }
    }

    fn tolerance() -> f64 {
        2f64.powi(-(BITS as i32) / 2)
    }

    fn tan_pi_fraction(q: u32, n: u32) -> Option<Self> {
        if (2 * q) % n == 0 && (q % n) != 0 && (2 * q / n) % 2 == 1 {
            return None; // vertical
        }
        let angle = Self::pi() * Self::from_int(q as i64) / Self::from_int(n as i64);
        Some(angle.tan())
    }

    fn to_scalar_string(&self) -> String {
        with_consts(|cc| self.0.format(Radix::Dec, RM, cc)).unwrap_or_else(|_| "NaN".to_string())
    }

    fn parse_scalar(s: &str) -> Result<Self> {
        let s = s.trim();
        // Exact rational strings are accepted and rounded once.
        if !s.contains(['.', 'e', 'E']) {
            if let Ok(r) = super::parse_rational(s) {
                return Ok(Self::from_rational(&r));
            }
        }
        let v = with_consts(|cc| astro_float::BigFloat::parse(s, Radix::Dec, BITS, RM, cc));
        if v.is_nan() {
            return Err(Error::parse("float scalar", format!("`{s}` is not a decimal float")));
        }
        Ok(BigFloat(v))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    type F = BigFloat<256>;

    #[test]
    fn string_round_trip_is_exact() {
        let t = F::tan_pi_fraction(1, 5).unwrap();
        let s = t.to_scalar_string();
        assert_eq!(F::parse_scalar(&s).unwrap(), t);
        assert!((t.to_f64() - (std::f64::consts::PI / 5.0).tan()).abs() < 1e-15);
    }

    #[test]
    fn to_f64_handles_sign_and_scale() {
        assert_eq!(F::from_int(-3).to_f64(), -3.0);
        assert_eq!(F::from_ratio(1, 1024).to_f64(), 1.0 / 1024.0);
        assert_eq!(F::zero().to_f64(), 0.0);
        assert!((F::from_int(1_000_000_007).to_f64() - 1_000_000_007.0).abs() < 1e-6);
    }

    #[test]
    fn vertical_tangent_is_none() {
        assert!(F::tan_pi_fraction(1, 2).is_none());
        assert!(F::tan_pi_fraction(3, 6).is_none());
        assert!(F::tan_pi_fraction(2, 4).is_none());
        assert!(F::tan_pi_fraction(1, 4).is_some());
    }

    #[test]
    fn parses_rational_strings() {
        let v = F::parse_scalar("1/3").unwrap();
        assert!((v.to_f64() - 1.0 / 3.0).abs() < 1e-16);
    }
}

//! Bivariate polynomials in `x1, x2` over a [`Scalar`] field.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use crate::scalar::Scalar;

/// Exponent pair `(i, j)` of the monomial `x1^i x2^j`.
pub type Exponent = (u32, u32);

/// Sparse bivariate polynomial. Zero coefficients are never stored.
#[derive(Clone, PartialEq)]
pub struct Poly<F> {
    terms: BTreeMap<Exponent, F>,
}

impl<F: Scalar> Default for Poly<F> {
    fn default() -> Self {
        Self::zero()
    }
}

impl<F: Scalar> Poly<F> {
    pub fn zero() -> Self {
        Poly { terms: BTreeMap::new() }
    }

    pub fn constant(c: F) -> Self {
        Self::monomial(0, 0, c)
    }

    pub fn monomial(i: u32, j: u32, c: F) -> Self {
        let mut p = Self::zero();
        p.add_term(i, j, c);
        p
    }

    pub fn x1() -> Self {
        Self::monomial(1, 0, F::one())
    }

    pub fn x2() -> Self {
        Self::monomial(0, 1, F::one())
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (Exponent, F)>) -> Self {
        let mut p = Self::zero();
        for ((i, j), c) in terms {
            p.add_term(i, j, c);
        }
        p
    }

    /// Adds `c·x1^i x2^j`, dropping the entry if it cancels exactly.
    pub fn add_term(&mut self, i: u32, j: u32, c: F) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry((i, j)) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let sum = e.get().clone() + c;
                if sum.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = sum;
                }
            }
        }
    }

    pub fn coeff(&self, i: u32, j: u32) -> F {
        self.terms.get(&(i, j)).cloned().unwrap_or_else(F::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exponent, &F)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Total degree; `-1` for the zero polynomial.
    pub fn degree(&self) -> i64 {
        self.terms.keys().map(|&(i, j)| (i + j) as i64).max().unwrap_or(-1)
    }

    pub fn scale(&self, c: &F) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        Self::from_terms(self.terms.iter().map(|(&e, v)| (e, v.clone() * c)))
    }

    /// Homogeneous component of total degree `d`.
    pub fn homogeneous_part(&self, d: u32) -> Self {
        Poly {
            terms: self
                .terms
                .iter()
                .filter(|((i, j), _)| i + j == d)
                .map(|(&e, v)| (e, v.clone()))
                .collect(),
        }
    }

    /// All homogeneous components, indexed by degree `0..=deg`.
    pub fn homogeneous_parts(&self) -> Vec<Self> {
        let deg = self.degree();
        (0..=deg.max(-1)).map(|d| self.homogeneous_part(d as u32)).collect()
    }

    /// Coefficients of the degree-`n` part in the basis `v_{n,i} = x2^i x1^(n-i)`.
    pub fn hom_coeffs(&self, n: u32) -> Vec<F> {
        (0..=n).map(|i| self.coeff(n - i, i)).collect()
    }

    /// Inverse of [`Poly::hom_coeffs`].
    pub fn from_hom_coeffs(n: u32, coeffs: &[F]) -> Self {
        assert_eq!(coeffs.len(), n as usize + 1, "need n+1 coefficients");
        Self::from_terms(coeffs.iter().enumerate().map(|(i, c)| ((n - i as u32, i as u32), c.clone())))
    }

    pub fn derivative(&self, var: usize) -> Self {
        let mut out = Self::zero();
        for (&(i, j), c) in &self.terms {
            let (e, ni, nj) = if var == 0 { (i, i.wrapping_sub(1), j) } else { (j, i, j.wrapping_sub(1)) };
            if e > 0 {
                out.add_term(ni, nj, c.clone() * F::from_int(e as i64));
            }
        }
        out
    }

    /// `Δf = ∂²f/∂x1² + ∂²f/∂x2²`.
    pub fn laplacian(&self) -> Self {
        let mut out = Self::zero();
        for (&(i, j), c) in &self.terms {
            if i >= 2 {
                out.add_term(i - 2, j, c.clone() * F::from_int((i * (i - 1)) as i64));
            }
            if j >= 2 {
                out.add_term(i, j - 2, c.clone() * F::from_int((j * (j - 1)) as i64));
            }
        }
        out
    }

    pub fn eval(&self, x1: &F, x2: &F) -> F {
        // Horner in x2 over Horner-in-x1 coefficient polynomials.
        let deg2 = self.terms.keys().map(|&(_, j)| j).max().unwrap_or(0);
        let mut acc = F::zero();
        for j in (0..=deg2).rev() {
            let deg1 = self.terms.keys().filter(|&&(_, jj)| jj == j).map(|&(i, _)| i).max();
            let mut inner = F::zero();
            if let Some(deg1) = deg1 {
                for i in (0..=deg1).rev() {
                    inner = inner * x1 + &self.coeff(i, j);
                }
            }
            acc = acc * x2 + &inner;
        }
        acc
    }

    pub fn eval_f64(&self, x1: f64, x2: f64) -> f64 {
        self.terms
            .iter()
            .map(|(&(i, j), c)| c.to_f64() * x1.powi(i as i32) * x2.powi(j as i32))
            .sum()
    }

    /// `f(a·x1 + b·x2, c·x1 + d·x2)` for the matrix `[[a, b], [c, d]]`.
    pub fn compose_linear(&self, m: &[[F; 2]; 2]) -> Self {
        let row0 = Self::from_terms([((1, 0), m[0][0].clone()), ((0, 1), m[0][1].clone())]);
        let row1 = Self::from_terms([((1, 0), m[1][0].clone()), ((0, 1), m[1][1].clone())]);
        self.compose(&row0, &row1)
    }

    /// Substitutes polynomials for `x1` and `x2`.
    pub fn compose(&self, p1: &Self, p2: &Self) -> Self {
        let max_i = self.terms.keys().map(|&(i, _)| i).max().unwrap_or(0);
        let max_j = self.terms.keys().map(|&(_, j)| j).max().unwrap_or(0);
        let pow_table = |p: &Self, max: u32| {
            let mut v = vec![Self::constant(F::one())];
            for k in 1..=max as usize {
                v.push(v[k - 1].clone() * p);
            }
            v
        };
        let pw1 = pow_table(p1, max_i);
        let pw2 = pow_table(p2, max_j);
        let mut out = Self::zero();
        for (&(i, j), c) in &self.terms {
            out = out + (pw1[i as usize].clone() * &pw2[j as usize]).scale(c);
        }
        out
    }

    /// Largest coefficient magnitude, as `f64`.
    pub fn max_abs_coeff(&self) -> f64 {
        self.terms.values().map(|c| c.to_f64().abs()).fold(0.0, f64::max)
    }

    /// True when every coefficient passes the backend zero test at `scale`.
    pub fn is_negligible(&self, scale: f64) -> bool {
        self.terms.values().all(|c| c.is_negligible(scale))
    }

    /// Divides by `x2 − s·x1`, returning `(quotient, remainder)` where the
    /// remainder is a polynomial in `x1` alone: `f = q·(x2 − s·x1) + r`.
    pub fn div_rem_line(&self, s: &F) -> (Self, Self) {
        // Collect coefficients of powers of x2 as polynomials in x1.
        let deg2 = self.terms.keys().map(|&(_, j)| j).max();
        let Some(deg2) = deg2 else {
            return (Self::zero(), Self::zero());
        };
        let row = |j: u32| {
            Self::from_terms(self.terms.iter().filter(|((_, jj), _)| *jj == j).map(|(&(i, _), c)| ((i, 0), c.clone())))
        };
        let root = Self::monomial(1, 0, s.clone());
        let mut quotient = Self::zero();
        let mut carry = Self::zero();
        // Synthetic division by (x2 − root) in the variable x2.
        for j in (0..=deg2).rev() {
            let cur = row(j) + carry.clone() * &root;
            if j == 0 {
                return (quotient, cur);
            }
            for (&(i, _), c) in cur.terms() {
                quotient.add_term(i, j - 1, c.clone());
            }
            carry = cur;
        }
        unreachable!()
    }

    /// Exact division by `x2`, if every term contains `x2`.
    pub fn div_x2(&self) -> Option<Self> {
        if self.terms.keys().any(|&(_, j)| j == 0) {
            return None;
        }
        Some(Poly { terms: self.terms.iter().map(|(&(i, j), c)| ((i, j - 1), c.clone())).collect() })
    }

    /// Exact division by `x1`, if every term contains `x1`.
    pub fn div_x1(&self) -> Option<Self> {
        if self.terms.keys().any(|&(i, _)| i == 0) {
            return None;
        }
        Some(Poly { terms: self.terms.iter().map(|(&(i, j), c)| ((i - 1, j), c.clone())).collect() })
    }

    pub fn map_coeffs<G: Scalar>(&self, f: impl Fn(&F) -> G) -> Poly<G> {
        Poly::from_terms(self.terms.iter().map(|(&e, c)| (e, f(c))))
    }
}

impl<F: Scalar> fmt::Debug for Poly<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .rev()
            .map(|(&(i, j), c)| format!("({})*x1^{i}*x2^{j}", c.to_scalar_string()))
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

impl<F: Scalar> Add for Poly<F> {
    type Output = Self;
    fn add(mut self, rhs: Self) -> Self {
        for ((i, j), c) in rhs.terms {
            self.add_term(i, j, c);
        }
        self
    }
}

impl<'r, F: Scalar> Add<&'r Poly<F>> for Poly<F> {
    type Output = Self;
    fn add(mut self, rhs: &Self) -> Self {
        for (&(i, j), c) in &rhs.terms {
            self.add_term(i, j, c.clone());
        }
        self
    }
}

impl<F: Scalar> Neg for Poly<F> {
    type Output = Self;
    fn neg(self) -> Self {
        Poly { terms: self.terms.into_iter().map(|(e, c)| (e, -c)).collect() }
    }
}

impl<F: Scalar> Sub for Poly<F> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

impl<'r, F: Scalar> Sub<&'r Poly<F>> for Poly<F> {
    type Output = Self;
    fn sub(mut self, rhs: &Self) -> Self {
        for (&(i, j), c) in &rhs.terms {
            self.add_term(i, j, -c.clone());
        }
        self
    }
}

impl<'r, F: Scalar> Mul<&'r Poly<F>> for Poly<F> {
    type Output = Self;
    fn mul(self, rhs: &Self) -> Self {
        let mut out = Self::zero();
        for (&(i1, j1), c1) in &self.terms {
            for (&(i2, j2), c2) in &rhs.terms {
                out.add_term(i1 + i2, j1 + j2, c1.clone() * c2);
            }
        }
        out
    }
}

impl<F: Scalar> Mul for Poly<F> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        self * &rhs
    }
}

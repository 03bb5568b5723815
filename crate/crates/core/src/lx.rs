//! The one-step generator `L_X f(x) = E f(x + X) − f(x)` on polynomials.

use crate::cone::binomial;
use crate::error::{Error, Result};
use crate::poly::Poly;
use crate::scalar::Scalar;
use crate::walk::{Transform, Walk};

#[derive(Debug, Clone, PartialEq)]
pub struct LxExpansion<F: Scalar> {
    pub input: Poly<F>,
    pub output: Poly<F>,
    /// `½Δf`.
    pub laplacian_part: Poly<F>,
    /// Moment terms with `k + l ≥ 3`; degree at most `deg f − 3`.
    pub remainder: Poly<F>,
}

/// `L_X f = ½Δf + Σ_{3 ≤ k+l ≤ n} ∂1^k ∂2^l f / (k! l!) · E[X1^k X2^l]`.
///
/// The first- and second-order moment terms are fixed by the normalization
/// and never evaluated.
pub fn apply_lx<F: Scalar>(f: &Poly<F>, mu: &crate::walk::MomentTable<F>) -> Result<LxExpansion<F>> {
    let n = f.degree();
    if n > mu.order as i64 {
        return Err(Error::InsufficientMoments { have: mu.order, need: n as usize });
    }
    let half = F::from_ratio(1, 2);
    let laplacian_part = f.laplacian().scale(&half);
    let remainder = taylor_remainder(f, |k, l| mu.get(k, l));
    let output = laplacian_part.clone() + &remainder;
    Ok(LxExpansion { input: f.clone(), output, laplacian_part, remainder })
}

/// `∂1^k ∂2^l (x1^i x2^j) / (k! l!) = C(i,k) C(j,l) x1^(i−k) x2^(j−l)`.
fn taylor_remainder<F: Scalar>(f: &Poly<F>, mu: impl Fn(u32, u32) -> F) -> Poly<F> {
    let mut out = Poly::zero();
    for (&(i, j), c) in f.terms() {
        for k in 0..=i {
            for l in 0..=j {
                if k + l < 3 {
                    continue;
                }
                let w = F::from_int((binomial(i as u64, k as u64) * binomial(j as u64, l as u64)) as i64);
                out.add_term(i - k, j - l, c.clone() * &w * &mu(k, l));
            }
        }
    }
    out
}

/// `Σ p·h(x + T·dy) − h(x)` by direct summation over the support.
pub fn verify_one_step<F: Scalar>(h: &Poly<F>, w: &Walk, tr: &Transform<F>, x: (&F, &F)) -> F {
    let mut acc = F::zero();
    for a in w.atoms() {
        let (d1, d2) = tr.apply(a.dy);
        acc = acc + h.eval(&(x.0.clone() + &d1), &(x.1.clone() + &d2)) * &F::from_rational(&a.p);
    }
    acc - h.eval(x.0, x.1)
}

/// Killed version in quadrant coordinates: `Σ p·g(y + dy)·1{y + dy ∈ (0,∞)²} − g(y)`
/// for a polynomial `g` already pulled back through `T`.
pub fn killed_one_step<F: Scalar>(g: &Poly<F>, w: &Walk, y: (i64, i64)) -> F {
    let mut acc = F::zero();
    for a in w.atoms() {
        let z = (y.0 + a.dy.0, y.1 + a.dy.1);
        if z.0 > 0 && z.1 > 0 {
            acc = acc + g.eval(&F::from_int(z.0), &F::from_int(z.1)) * &F::from_rational(&a.p);
        }
    }
    acc - g.eval(&F::from_int(y.0), &F::from_int(y.1))
}

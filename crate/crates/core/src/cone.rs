//! Wedges `K_α` bounded by `x2 = 0` and `x2 = tan(α)·x1`, and the classical
//! harmonic polynomials `u_m = Im(x1 + i·x2)^m` that vanish on them.

use crate::error::{Error, Result};
use crate::poly::Poly;
use crate::scalar::{BigRational, Scalar};

/// The second boundary ray.
#[derive(Debug, Clone, PartialEq)]
pub enum Boundary<F> {
    /// `x2 = b·x1`, `x1 > 0` for `b > 0`, `x1 < 0` for `b < 0`.
    Slope(F),
    /// The positive `x2` axis (`α = π/2`).
    Vertical,
    /// The negative `x1` axis (`α = π`).
    HalfPlane,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConeSpec<F> {
    /// `Some(m)` when `α = π/m`.
    pub m: Option<u32>,
    pub boundary: Boundary<F>,
    /// Opening angle in radians.
    pub alpha: f64,
    /// `π/α`.
    pub p_alpha: f64,
}

/// Cone `K_{π/m}` with `b = tan(π/m)` in the field `F`.
pub fn make_cone<F: Scalar>(m: u32) -> Result<ConeSpec<F>> {
    if m == 0 {
        return Err(Error::Precondition("m must be at least 1".into()));
    }
    let boundary = match m {
        1 => Boundary::HalfPlane,
        2 => Boundary::Vertical,
        _ => Boundary::Slope(F::tan_pi_fraction(1, m).ok_or_else(|| {
            Error::AngleNotRepresentable(format!("tan(pi/{m}) is not in the {} backend", F::backend()))
        })?),
    };
    Ok(ConeSpec { m: Some(m), boundary, alpha: std::f64::consts::PI / m as f64, p_alpha: m as f64 })
}

impl<F: Scalar> ConeSpec<F> {
    /// Cone with an arbitrary slope `b ≠ 0`; `α = atan(b)` or `π + atan(b)`.
    pub fn from_slope(b: F) -> Result<Self> {
        let bf = b.to_f64();
        if b.is_zero() || !bf.is_finite() {
            return Err(Error::AngleOutOfRange("slope must be finite and nonzero".into()));
        }
        let alpha = if bf > 0.0 { bf.atan() } else { std::f64::consts::PI + bf.atan() };
        Ok(Self::with_angle(Boundary::Slope(b), alpha))
    }

    pub(crate) fn with_angle(boundary: Boundary<F>, alpha: f64) -> Self {
        let p_alpha = std::f64::consts::PI / alpha;
        let rounded = p_alpha.round();
        let m = ((p_alpha - rounded).abs() < 1e-12 && rounded >= 1.0).then_some(rounded as u32);
        ConeSpec { m, boundary, alpha, p_alpha }
    }

    pub fn slope(&self) -> Option<&F> {
        match &self.boundary {
            Boundary::Slope(b) => Some(b),
            _ => None,
        }
    }

    /// Linear form vanishing on the second ray: `b·x1 − x2`, `x1` or `x2`.
    pub fn second_ray_form(&self) -> Poly<F> {
        match &self.boundary {
            Boundary::Slope(b) => Poly::from_terms([((1, 0), b.clone()), ((0, 1), -F::one())]),
            Boundary::Vertical => Poly::x1(),
            Boundary::HalfPlane => Poly::x2(),
        }
    }

    /// Coefficients (by power of `t`) of `f` restricted to the second ray,
    /// parametrized as `(t, b·t)`, `(0, t)` or `(−t, 0)`.
    pub fn second_ray_restriction(&self, f: &Poly<F>) -> Vec<F> {
        let deg = f.degree().max(0) as usize;
        let mut out = vec![F::zero(); deg + 1];
        for (&(i, j), c) in f.terms() {
            let v = match &self.boundary {
                Boundary::Slope(b) => Some(c.clone() * &b.powi(j)),
                Boundary::Vertical => (i == 0).then(|| c.clone()),
                Boundary::HalfPlane => (j == 0).then(|| if i % 2 == 1 { -c.clone() } else { c.clone() }),
            };
            if let Some(v) = v {
                let slot = &mut out[(i + j) as usize];
                *slot = slot.clone() + v;
            }
        }
        out
    }

    /// Whether `f` vanishes identically on both rays.
    pub fn vanishes_on_boundary(&self, f: &Poly<F>) -> bool {
        let scale = f.max_abs_coeff();
        let first = f.terms().filter(|((_, j), _)| *j == 0).all(|(_, c)| c.is_negligible(scale));
        first && self.second_ray_restriction(f).iter().all(|c| c.is_negligible(scale))
    }

    /// `f / (x2·(b·x1 − x2))` when the division leaves a negligible remainder.
    pub fn boundary_quotient(&self, f: &Poly<F>) -> Option<Poly<F>> {
        let Boundary::Slope(b) = &self.boundary else { return None };
        let scale = f.max_abs_coeff();
        if !f.terms().filter(|((_, j), _)| *j == 0).all(|(_, c)| c.is_negligible(scale)) {
            return None;
        }
        let shifted = Poly::from_terms(f.terms().filter(|((_, j), _)| *j > 0).map(|(&(i, j), c)| ((i, j - 1), c.clone())));
        let (q, r) = shifted.div_rem_line(b);
        r.is_negligible(scale).then(|| -q)
    }

    /// Direction `(cos α, sin α)` of the second ray.
    pub fn second_ray_direction(&self) -> (f64, f64) {
        (self.alpha.cos(), self.alpha.sin())
    }

    /// Strict interior test in `f64`.
    pub fn contains(&self, x1: f64, x2: f64) -> bool {
        if x2 <= 0.0 {
            return false;
        }
        let (c, s) = self.second_ray_direction();
        // Cross product of the second ray direction with x must be negative.
        c * x2 - s * x1 < 0.0
    }

    /// Euclidean distance to the nearer boundary ray.
    pub fn boundary_distance(&self, x1: f64, x2: f64) -> f64 {
        let to_ray = |dx: f64, dy: f64| {
            let proj = x1 * dx + x2 * dy;
            if proj <= 0.0 {
                x1.hypot(x2)
            } else {
                (x1 * dy - x2 * dx).abs()
            }
        };
        let (c, s) = self.second_ray_direction();
        to_ray(1.0, 0.0).min(to_ray(c, s))
    }
}

/// `Im(x1 + i·x2)^m = Σ_k (−1)^k C(m, 2k+1) x1^(m−2k−1) x2^(2k+1)`.
pub fn u_poly<F: Scalar>(m: u32) -> Poly<F> {
    let mut p = Poly::zero();
    let mut k = 0;
    while 2 * k < m {
        let c = binomial(m as u64, (2 * k + 1) as u64) as i64;
        let sign = if k % 2 == 0 { 1 } else { -1 };
        p.add_term(m - 2 * k - 1, 2 * k + 1, F::from_int(sign * c));
        k += 1;
    }
    p
}

/// `u_m(x) / (|x|^(m−1) δ(x))`, which lies in `[1, m]` inside `K_{π/m}`.
pub fn bm1_ratio(m: u32, x: (&BigRational, &BigRational)) -> Result<f64> {
    let cone = make_cone::<crate::scalar::BigFloat<128>>(m)?;
    let (x1, x2) = (x.0.clone(), x.1.clone());
    let (f1, f2) = (x1.to_f64(), x2.to_f64());
    let delta = cone.boundary_distance(f1, f2);
    if delta == 0.0 || x2 == <BigRational as num_traits::Zero>::zero() {
        return Err(Error::BoundaryPoint);
    }
    if !cone.contains(f1, f2) {
        return Err(Error::Precondition(format!("({f1}, {f2}) is outside K_pi/{m}")));
    }
    let u = u_poly::<BigRational>(m).eval(&x1, &x2).to_f64();
    Ok(u / (f1.hypot(f2).powi(m as i32 - 1) * delta))
}

pub fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u64, |acc, i| acc * (n - i) / (i + 1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{BigFloat, Quad};
    use proptest::prelude::*;

    type Q = BigRational;

    #[test]
    fn cones_for_small_m() {
        assert_eq!(make_cone::<Q>(4).unwrap().boundary, Boundary::Slope(Q::from_int(1)));
        assert_eq!(make_cone::<Q>(2).unwrap().boundary, Boundary::Vertical);
        assert_eq!(make_cone::<Quad<3>>(2).unwrap().boundary, Boundary::Vertical);
        assert_eq!(make_cone::<Q>(1).unwrap().boundary, Boundary::HalfPlane);
        let c3 = make_cone::<Quad<3>>(3).unwrap();
        let b = c3.slope().unwrap().clone();
        assert_eq!(b, Quad::<3>::sqrt_d());
        assert!((Quad::<3>::from_int(3) * &b - b.powi(3)).is_zero());
        assert_eq!(make_cone::<Q>(3).unwrap_err().code(), "angle-not-representable");
        assert_eq!(make_cone::<Q>(5).unwrap_err().code(), "angle-not-representable");
    }

    #[test]
    fn slopes_solve_im_equation() {
        fn check<F: Scalar>(m: u32) {
            let cone = make_cone::<F>(m).unwrap();
            let b = cone.slope().unwrap();
            assert!(b.sign() > 0);
            let v = u_poly::<F>(m).eval(&F::one(), b);
            assert!(v.is_negligible(1.0), "m={m}: {v:?}");
        }
        check::<Quad<3>>(3);
        check::<Quad<3>>(6);
        check::<Quad<3>>(12);
        check::<Quad<2>>(8);
        for m in 3..=20 {
            check::<BigFloat<256>>(m);
        }
    }

    #[test]
    fn u_poly_examples() {
        let p = |ts: &[(u32, u32, i64)]| Poly::<Q>::from_terms(ts.iter().map(|&(i, j, c)| ((i, j), Q::from_int(c))));
        assert_eq!(u_poly::<Q>(3), p(&[(2, 1, 3), (0, 3, -1)]));
        assert_eq!(u_poly::<Q>(1), p(&[(0, 1, 1)]));
        assert_eq!(u_poly::<Q>(5), p(&[(4, 1, 5), (2, 3, -10), (0, 5, 1)]));
        assert_eq!(u_poly::<Q>(4), p(&[(3, 1, 4), (1, 3, -4)]));
    }

    #[test]
    fn u_poly_matches_complex_power() {
        // Oracle: multiply (x1 + i x2) out m times with integer pairs.
        for m in 1..=12u32 {
            let mut re = Poly::<Q>::constant(Q::from_int(1));
            let mut im = Poly::<Q>::zero();
            for _ in 0..m {
                let nre = re.clone() * &Poly::x1() - im.clone() * &Poly::x2();
                let nim = re * &Poly::x2() + im * &Poly::x1();
                re = nre;
                im = nim;
            }
            assert_eq!(u_poly::<Q>(m), im, "m={m}");
            assert!(u_poly::<Q>(m).laplacian().is_zero());
        }
    }

    #[test]
    fn bm1_examples() {
        let r = |n: i64| Q::from_int(n);
        assert!((bm1_ratio(2, (&r(1), &r(1))).unwrap() - 2f64.sqrt()).abs() < 1e-12);
        assert!((bm1_ratio(1, (&r(0), &r(1))).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(bm1_ratio(2, (&r(1), &r(0))).unwrap_err(), Error::BoundaryPoint);
        // (cos π/6, sin π/6) approximated by a nearby rational point.
        let x1 = Q::new(866_025.into(), 1_000_000.into());
        let x2 = Q::new(1.into(), 2.into());
        let v = bm1_ratio(3, (&x1, &x2)).unwrap();
        assert!((1.0..=3.0).contains(&v));
    }

    #[test]
    fn restriction_to_second_ray() {
        let cone = make_cone::<Q>(4).unwrap();
        assert!(cone.vanishes_on_boundary(&u_poly::<Q>(4)));
        assert!(!cone.vanishes_on_boundary(&u_poly::<Q>(2)));
        let v = make_cone::<Q>(2).unwrap();
        assert!(v.vanishes_on_boundary(&u_poly::<Q>(2)));
    }

    proptest! {
        #[test]
        fn u_poly_vanishes_on_first_ray(m in 1u32..12, t in -50i64..50) {
            prop_assert!(u_poly::<Q>(m).eval(&Q::from_int(t), &Q::from_int(0)).is_zero());
        }

        #[test]
        fn u_poly_vanishes_on_second_ray(m in 1u32..12, t in 1i64..40) {
            type F = BigFloat<256>;
            let ang = F::pi() / F::from_int(m as i64);
            let t = F::from_int(t);
            let v = u_poly::<F>(m).eval(&(t.clone() * &ang.cos()), &(t.clone() * &ang.sin()));
            prop_assert!(v.to_f64().abs() <= 2f64.powi(-128) * t.to_f64().powi(m as i32));
        }

        #[test]
        fn bm1_bounds(m in 2u32..=8, a in 1i64..60, c in 1i64..60) {
            // Random interior point at angle fraction a/61 of the opening.
            let ang = std::f64::consts::PI / m as f64 * a as f64 / 61.0;
            let r = c as f64 / 7.0;
            let x1 = Q::from_float(r * ang.cos()).unwrap();
            let x2 = Q::from_float(r * ang.sin()).unwrap();
            let v = bm1_ratio(m, (&x1, &x2)).unwrap();
            prop_assert!(v >= 1.0 - 1e-10 && v <= m as f64 + 1e-10, "ratio {v}");
        }
    }
}

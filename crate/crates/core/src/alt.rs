//! Monomial-by-monomial elimination: particular solutions of
//! `Δf = x1^j x2^k` from a Fourier expansion in polar coordinates, harmonic
//! boundary corrections, and a second builder for harmonic polynomials.


use crate::cone::{binomial, u_poly, Boundary, ConeSpec};
use crate::error::{Error, Result};
use crate::linalg;
use crate::lx::apply_lx;
use crate::poly::Poly;
use crate::scalar::{BigRational, Scalar};
use crate::walk::MomentTable;

type Q = BigRational;

/// Coefficients of `f_{j,k} = r^(n+2) Σ_l (κ_l cos lβ + μ_l sin lβ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierProfile {
    pub n: u32,
    pub kappa: Vec<Q>,
    pub mu_s: Vec<Q>,
}

impl FourierProfile {
    pub fn new(j: u32, k: u32) -> Self {
        let n = j + k;
        let mut cos_c = vec![Q::zero(); n as usize + 1];
        let mut sin_c = vec![Q::zero(); n as usize + 1];
        let scale = Q::new(1.into(), num_bigint::BigInt::from(2).pow(n));
        for w in 0..=j {
            for s in 0..=k {
                let sign = if s % 2 == 0 { 1 } else { -1 };
                let c = Q::from_integer((sign * (binomial(j as u64, w as u64) * binomial(k as u64, s as u64)) as i64).into()) * &scale;
                let p = n as i64 - 2 * (w + s) as i64;
                let l = p.unsigned_abs() as usize;
                let psign = if p < 0 { -Q::one() } else { Q::one() };
                // cos(pβ − kπ/2) by k mod 4.
                match k % 4 {
                    0 => cos_c[l] += c,
                    1 => sin_c[l] += c * psign,
                    2 => cos_c[l] -= c,
                    _ => sin_c[l] -= c * psign,
                }
            }
        }
        let denom = |l: usize| Q::from_integer((((n + 2) * (n + 2)) as i64 - (l * l) as i64).into());
        let kappa = cos_c.into_iter().enumerate().map(|(l, c)| c / denom(l)).collect();
        let mu_s = sin_c.into_iter().enumerate().map(|(l, c)| c / denom(l)).collect();
        FourierProfile { n, kappa, mu_s }
    }

    /// The profile as a homogeneous polynomial of degree `n + 2`.
    pub fn to_poly(&self) -> Poly<Q> {
        let deg = self.n + 2;
        let mut out = Poly::zero();
        for l in 0..=self.n {
            if !self.kappa[l as usize].is_zero() {
                out = out + polar_cos(deg, l).scale(&self.kappa[l as usize]);
            }
            if !self.mu_s[l as usize].is_zero() {
                out = out + polar_sin(deg, l).scale(&self.mu_s[l as usize]);
            }
        }
        out
    }
}

/// Chebyshev polynomial of the first kind, coefficients by power.
pub fn chebyshev_t(l: u32) -> Vec<i64> {
    chebyshev(l, vec![1], vec![0, 1])
}

/// Chebyshev polynomial of the second kind.
pub fn chebyshev_u(l: u32) -> Vec<i64> {
    chebyshev(l, vec![1], vec![0, 2])
}

fn chebyshev(l: u32, p0: Vec<i64>, p1: Vec<i64>) -> Vec<i64> {
    if l == 0 {
        return p0;
    }
    let (mut a, mut b) = (p0, p1);
    for _ in 1..l {
        let mut c = vec![0i64; b.len() + 1];
        for (i, v) in b.iter().enumerate() {
            c[i + 1] += 2 * v;
        }
        for (i, v) in a.iter().enumerate() {
            c[i] -= v;
        }
        a = b;
        b = c;
    }
    b
}

/// `(x1² + x2²)^e`.
fn r2_power(e: u32) -> Poly<Q> {
    let r2 = Poly::from_terms([((2, 0), Q::one()), ((0, 2), Q::one())]);
    (0..e).fold(Poly::constant(Q::one()), |acc, _| acc * &r2)
}

/// `r^d p(cos β)` for a univariate `p` whose terms have the parity of `d`.
fn homogenize(p: &[i64], d: u32) -> Poly<Q> {
    let mut out = Poly::zero();
    for (i, &c) in p.iter().enumerate() {
        if c == 0 {
            continue;
        }
        let i = i as u32;
        debug_assert!((d - i) % 2 == 0);
        out = out + (Poly::monomial(i, 0, Q::from_integer(c.into())) * &r2_power((d - i) / 2));
    }
    out
}

/// `r^deg cos(lβ) = r^(deg−l) · r^l T_l(cos β)`.
pub fn polar_cos(deg: u32, l: u32) -> Poly<Q> {
    homogenize(&chebyshev_t(l), deg)
}

/// `r^deg sin(lβ) = r^(deg−l) · x2 · r^(l−1) U_(l−1)(cos β)`.
pub fn polar_sin(deg: u32, l: u32) -> Poly<Q> {
    if l == 0 {
        return Poly::zero();
    }
    homogenize(&chebyshev_u(l - 1), deg - 1) * &Poly::x2()
}

/// `f_{j,k}` with `Δf_{j,k} = x1^j x2^k`, homogeneous of degree `j + k + 2`.
pub fn particular_solution(j: u32, k: u32) -> Poly<Q> {
    FourierProfile::new(j, k).to_poly()
}

/// `Im((c + i s)(x1 − i x2))^N` with `(c, s) = (1, b)` or `(0, 1)`: harmonic,
/// vanishing on the second ray.
fn second_ray_harmonic<F: Scalar>(deg: u32, boundary: &Boundary<F>) -> Result<Poly<F>> {
    let (re0, im0) = match boundary {
        Boundary::Slope(b) => (
            Poly::from_terms([((1, 0), F::one()), ((0, 1), b.clone())]),
            Poly::from_terms([((1, 0), b.clone()), ((0, 1), -F::one())]),
        ),
        Boundary::Vertical => (Poly::x2(), Poly::x1()),
        Boundary::HalfPlane => return Err(Error::Precondition("half-plane has no second ray".into())),
    };
    let (mut re, mut im) = (Poly::constant(F::one()), Poly::zero());
    for _ in 0..deg {
        let nre = re.clone() * &re0 - im.clone() * &im0;
        im = re * &im0 + im * &re0;
        re = nre;
    }
    Ok(im)
}

/// `g = Â g1 + B̂ g2` with `fp + g = 0` on both rays, `g1 = u_N` vanishing on
/// `x2 = 0` and `g2` on the second ray.
pub fn harmonic_correction<F: Scalar>(fp: &Poly<F>, cone: &ConeSpec<F>, n: u32) -> Result<Poly<F>> {
    let m = cone.m.ok_or_else(|| Error::Precondition("cone must be K_{pi/m}".into()))?;
    let deg = n + 2;
    if deg >= m {
        return Err(Error::ResonantDegree { degree: deg as usize, m: m as usize });
    }
    let g1 = u_poly::<F>(deg);
    let g2 = second_ray_harmonic(deg, &cone.boundary)?;
    let top = |p: &Poly<F>| cone.second_ray_restriction(p).get(deg as usize).cloned().unwrap_or_else(F::zero);
    let a = vec![vec![g1.coeff(deg, 0), g2.coeff(deg, 0)], vec![top(&g1), top(&g2)]];
    let rhs = vec![-fp.coeff(deg, 0), -top(fp)];
    let sol = linalg::solve(&a, &rhs).ok_or(Error::ResonantDegree { degree: deg as usize, m: m as usize })?;
    Ok(g1.scale(&sol[0]) + g2.scale(&sol[1]))
}

/// `(f_{j,k}, g_{j,k}, F_{j,k})`: `ΔF = x1^j x2^k`, `F = 0` on both rays.
pub fn eliminate_monomial<F: Scalar>(j: u32, k: u32, cone: &ConeSpec<F>) -> Result<(Poly<F>, Poly<F>, Poly<F>)> {
    let f = particular_solution(j, k).map_coeffs(F::from_rational);
    let g = harmonic_correction(&f, cone, j + k)?;
    let full = f.clone() + &g;
    Ok((f, g, full))
}

/// Builds `h = u_m + corrections` by repeatedly cancelling the top part
/// `Σ c_{jk} x1^j x2^k` of `L_X h` with `−2 Σ c_{jk} F_{j,k}`.
pub fn build_harmonic_alt<F: Scalar>(m: u32, cone: &ConeSpec<F>, mu: &MomentTable<F>) -> Result<Poly<F>> {
    if cone.m != Some(m) {
        return Err(Error::Precondition(format!("cone is not K_pi/{m}")));
    }
    if (mu.order as u32) < m {
        return Err(Error::InsufficientMoments { have: mu.order, need: m as usize });
    }
    if m == 1 {
        return Ok(Poly::x2());
    }
    let mut h = u_poly::<F>(m);
    let minus_two = F::from_int(-2);
    for d in (2..m).rev() {
        let top = apply_lx(&h, mu)?.output.homogeneous_part(d - 2);
        let mut corr = Poly::zero();
        for (&(j, k), c) in top.terms() {
            let (_, _, full) = eliminate_monomial(j, k, cone)?;
            corr = corr + full.scale(&(c.clone() * &minus_two));
        }
        h = h + corr;
    }
    Ok(h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cone::make_cone;
    use crate::harmonic::construct_harmonic;
    use crate::scalar::{BigFloat, Quad};
    use crate::walk::{builtin_walk, walk_moments};
    use proptest::prelude::*;

    fn qp(ts: &[(u32, u32, i64, i64)]) -> Poly<Q> {
        Poly::from_terms(ts.iter().map(|&(i, j, n, d)| ((i, j), Q::new(n.into(), d.into()))))
    }

    #[test]
    fn particular_solution_examples() {
        assert_eq!(particular_solution(0, 0), qp(&[(2, 0, 1, 4), (0, 2, 1, 4)]));
        assert_eq!(particular_solution(1, 0), qp(&[(3, 0, 1, 8), (1, 2, 1, 8)]));
        assert_eq!(particular_solution(2, 1).laplacian(), qp(&[(2, 1, 1, 1)]));
    }

    #[test]
    fn particular_solutions_up_to_degree_8() {
        for n in 0..=8u32 {
            for j in 0..=n {
                let f = particular_solution(j, n - j);
                assert_eq!(f.laplacian(), Poly::monomial(j, n - j, Q::one()), "j={j} k={}", n - j);
                assert_eq!(f.degree(), n as i64 + 2);
            }
        }
    }

    #[test]
    fn chebyshev_known_values() {
        assert_eq!(chebyshev_t(3), vec![0, -3, 0, 4]);
        assert_eq!(chebyshev_u(2), vec![-1, 0, 4]);
        assert_eq!(chebyshev_t(0), vec![1]);
    }

    #[test]
    fn polar_conversion_samples() {
        for deg in 0..=9u32 {
            for l in (deg % 2..=deg).step_by(2) {
                let pc = polar_cos(deg, l);
                let ps = polar_sin(deg, l);
                for s in 0..64 {
                    let beta = 2.0 * std::f64::consts::PI * s as f64 / 64.0;
                    let r = 1.3f64;
                    let (x1, x2) = (r * beta.cos(), r * beta.sin());
                    let rd = r.powi(deg as i32);
                    assert!((pc.eval_f64(x1, x2) - rd * (l as f64 * beta).cos()).abs() < 1e-10);
                    assert!((ps.eval_f64(x1, x2) - rd * (l as f64 * beta).sin()).abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn corrections_satisfy_three_conditions() {
        let c4 = make_cone::<Q>(4).unwrap();
        for j in 0..=1 {
            let (_, g, full) = eliminate_monomial(j, 1 - j, &c4).unwrap();
            assert!(g.laplacian().is_zero());
            assert_eq!(full.laplacian(), Poly::monomial(j, 1 - j, Q::one()));
            assert!(c4.vanishes_on_boundary(&full));
        }
        type F = BigFloat<256>;
        let c5 = make_cone::<F>(5).unwrap();
        let (_, _, full) = eliminate_monomial(2, 0, &c5).unwrap();
        assert!((full.laplacian() - Poly::monomial(2, 0, F::one())).is_negligible(10.0));
        assert!(c5.vanishes_on_boundary(&full));
        assert_eq!(eliminate_monomial(2, 1, &c5).unwrap_err().code(), "resonant-degree");
    }

    #[test]
    fn correction_without_first_ray_part() {
        // fp already vanishes on x2 = 0.
        let c4 = make_cone::<Q>(4).unwrap();
        let fp = Poly::monomial(2, 1, Q::one());
        let g = harmonic_correction(&fp, &c4, 1).unwrap();
        assert!(g.coeff(3, 0).is_zero());
        assert!(c4.vanishes_on_boundary(&(fp + g)));
    }

    #[test]
    fn agrees_with_main_builder_exactly() {
        let (tr, mu) = walk_moments::<Q>(&builtin_walk(4).unwrap(), 4).unwrap();
        assert_eq!(build_harmonic_alt(4, &tr.cone, &mu).unwrap(), construct_harmonic(4, &tr.cone, &mu).unwrap().h);
        let c3 = make_cone::<Quad<3>>(3).unwrap();
        let mu3 = MomentTable::with_higher(3, |k, l| Quad::<3>::from_ratio(k as i64 - 2 * l as i64, 3)).unwrap();
        assert_eq!(build_harmonic_alt(3, &c3, &mu3).unwrap(), construct_harmonic(3, &c3, &mu3).unwrap().h);
        let c2 = make_cone::<Q>(2).unwrap();
        let mu2 = MomentTable::with_higher(2, |_, _| Q::zero()).unwrap();
        assert_eq!(build_harmonic_alt(2, &c2, &mu2).unwrap(), Poly::monomial(1, 1, Q::from_integer(2.into())));
    }

    #[test]
    fn agrees_with_main_builder_in_float() {
        type F = BigFloat<256>;
        for m in 5..=7u32 {
            let cone = make_cone::<F>(m).unwrap();
            let mu = MomentTable::with_higher(m as usize, |k, l| F::from_ratio((3 * k as i64 + 5 * l as i64) % 7 - 3, (k + l) as i64)).unwrap();
            let a = build_harmonic_alt(m, &cone, &mu).unwrap();
            let b = construct_harmonic(m, &cone, &mu).unwrap().h;
            assert!((a.clone() - &b).is_negligible(a.max_abs_coeff()), "m={m}");
            assert!(apply_lx(&a, &mu).unwrap().output.is_negligible(a.max_abs_coeff()));
        }
    }

    proptest! {
        #[test]
        fn fourier_parity(j in 0u32..7, k in 0u32..7) {
            let p = FourierProfile::new(j, k);
            for l in 0..=p.n {
                if (l + p.n) % 2 == 1 {
                    prop_assert!(p.kappa[l as usize].is_zero() && p.mu_s[l as usize].is_zero());
                }
            }
        }
    }
}

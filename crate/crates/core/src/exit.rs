//! Polynomial Poisson problems `L_X F = f`, `F = 0` on `∂K_α`, and the exit
//! time moment polynomials `G_k(x) = E[τ_x^k]`.

use crate::cone::{binomial, Boundary, ConeSpec};
use crate::error::{Error, Result};
use crate::harmonic::descend;
use crate::lx::apply_lx;
use crate::poly::Poly;
use crate::scalar::Scalar;
use crate::walk::MomentTable;

/// Guard band for comparing degrees against `π/α`.
pub const RESONANCE_GUARD: f64 = 1e-9;

/// The unique polynomial `F` of degree `n` with `L_X F = f` vanishing on both rays.
pub fn poisson_solve<F: Scalar>(f: &Poly<F>, cone: &ConeSpec<F>, mu: &MomentTable<F>, n: usize) -> Result<Poly<F>> {
    if n as f64 >= cone.p_alpha - RESONANCE_GUARD {
        return Err(Error::DegreeTooHigh { n, p_alpha: cone.p_alpha });
    }
    if f.degree() > n as i64 - 2 {
        return Err(Error::Precondition(format!("rhs degree {} exceeds n - 2 = {}", f.degree(), n as i64 - 2)));
    }
    if mu.order < n {
        return Err(Error::InsufficientMoments { have: mu.order, need: n });
    }
    let sol = descend(Poly::zero(), f, n, cone, mu, |degree| Error::ResonantSubdegree { degree })?;
    let residual = apply_lx(&sol, mu)?.output - f;
    if !residual.is_negligible(sol.max_abs_coeff().max(f.max_abs_coeff())) {
        return Err(Error::ResonantSubdegree { degree: residual.degree().max(0) as usize });
    }
    Ok(sol)
}

/// `x2·(b·x1 − x2)`.
pub fn first_moment_poly<F: Scalar>(b: &F) -> Poly<F> {
    Poly::from_terms([((1, 1), b.clone()), ((0, 2), -F::one())])
}

#[derive(Debug, Clone, PartialEq)]
pub struct MomentPolyResult<F: Scalar> {
    pub k: usize,
    pub g: Poly<F>,
    /// Right-hand side `−1 − Σ_{l<k} C(k,l)(G_l + L_X G_l)`.
    pub rhs: Poly<F>,
    /// `L_X G_k − rhs`.
    pub residual: Poly<F>,
}

/// Memoized recursion for `G_1, G_2, …` on one cone and moment table.
pub struct MomentSolver<'a, F: Scalar> {
    cone: &'a ConeSpec<F>,
    mu: &'a MomentTable<F>,
    /// `(G_l, L_X G_l)` for `l = 1, 2, …`.
    memo: Vec<(Poly<F>, Poly<F>)>,
}

impl<'a, F: Scalar> MomentSolver<'a, F> {
    pub fn new(cone: &'a ConeSpec<F>, mu: &'a MomentTable<F>) -> Self {
        MomentSolver { cone, mu, memo: Vec::new() }
    }

    fn check_k(&self, k: usize) -> Result<()> {
        let half_p = self.cone.p_alpha / 2.0;
        if k == 0 {
            return Err(Error::Precondition("moment order k must be at least 1".into()));
        }
        if k as f64 >= half_p - RESONANCE_GUARD {
            return Err(Error::MomentNotFinite { k, half_p });
        }
        if self.mu.order < 2 * k {
            return Err(Error::InsufficientMoments { have: self.mu.order, need: 2 * k });
        }
        Ok(())
    }

    fn rhs(&self, k: usize) -> Poly<F> {
        let mut rhs = Poly::constant(-F::one());
        for (l, (g, lg)) in self.memo.iter().enumerate().take(k - 1) {
            let c = F::from_int(binomial(k as u64, l as u64 + 1) as i64);
            rhs = rhs - (g.clone() + lg).scale(&c);
        }
        rhs
    }

    pub fn moment(&mut self, k: usize) -> Result<MomentPolyResult<F>> {
        self.check_k(k)?;
        while self.memo.len() < k {
            let l = self.memo.len() + 1;
            let g = if l == 1 {
                match &self.cone.boundary {
                    Boundary::Slope(b) => first_moment_poly(b),
                    _ => unreachable!("k < p_alpha/2 excludes alpha >= pi/2"),
                }
            } else {
                poisson_solve(&self.rhs(l), self.cone, self.mu, 2 * l)?
            };
            let lg = apply_lx(&g, self.mu)?.output;
            self.memo.push((g, lg));
        }
        let (g, lg) = self.memo[k - 1].clone();
        let rhs = self.rhs(k);
        let residual = lg - &rhs;
        Ok(MomentPolyResult { k, g, rhs, residual })
    }
}

/// `G_k` as a polynomial in wedge coordinates.
pub fn tau_moment_poly<F: Scalar>(k: usize, cone: &ConeSpec<F>, mu: &MomentTable<F>) -> Result<MomentPolyResult<F>> {
    MomentSolver::new(cone, mu).moment(k)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExitPositionMoments<F> {
    /// `E[x_j + S_j(τ_x)] = x_j`.
    pub mean1: F,
    pub mean2: F,
    /// `E[(x_j + S_j(τ_x))²] = x_j² + G_1(x)`; only for `α < π/2`.
    pub second1: Option<F>,
    pub second2: Option<F>,
}

impl<F: Scalar> ExitPositionMoments<F> {
    pub fn second(&self) -> Result<(F, F)> {
        match (&self.second1, &self.second2) {
            (Some(a), Some(b)) => Ok((a.clone(), b.clone())),
            _ => Err(Error::AngleOutOfRange("second exit-position moments need alpha < pi/2".into())),
        }
    }
}

pub fn exit_position_moments<F: Scalar>(cone: &ConeSpec<F>, x: (&F, &F)) -> Result<ExitPositionMoments<F>> {
    if cone.alpha >= std::f64::consts::PI - RESONANCE_GUARD {
        return Err(Error::AngleOutOfRange("exit-position means need alpha < pi".into()));
    }
    let (f1, f2) = (x.0.to_f64(), x.1.to_f64());
    if !cone.contains(f1, f2) && cone.boundary_distance(f1, f2) > 1e-12 * f1.hypot(f2).max(1.0) {
        return Err(Error::Precondition("start point lies outside the wedge".into()));
    }
    let (second1, second2) = match &cone.boundary {
        Boundary::Slope(b) if b.sign() > 0 => {
            let g1 = first_moment_poly(b).eval(x.0, x.1);
            (Some(x.0.clone() * x.0 + &g1), Some(x.1.clone() * x.1 + &g1))
        }
        _ => (None, None),
    };
    Ok(ExitPositionMoments { mean1: x.0.clone(), mean2: x.1.clone(), second1, second2 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cone::make_cone;
    use crate::scalar::{BigFloat, BigRational, Quad};
    use crate::walk::{builtin_walk, walk_moments};

    type Q = BigRational;
    type Q3 = Quad<3>;
    type F256 = BigFloat<256>;

    fn generic_mu<F: Scalar>(order: usize, seed: i64) -> MomentTable<F> {
        MomentTable::with_higher(order, |k, l| F::from_ratio((k as i64 * 3 + l as i64 * 7 + seed) % 13 - 6, (k + l) as i64)).unwrap()
    }

    #[test]
    fn first_moment_is_closed_form() {
        let cone = ConeSpec::from_slope(Q::new(3.into(), 4.into())).unwrap();
        let mu = generic_mu::<Q>(2, 0);
        let r = tau_moment_poly(1, &cone, &mu).unwrap();
        assert_eq!(r.g, first_moment_poly(&Q::new(3.into(), 4.into())));
        assert!(r.residual.is_zero());
        assert_eq!(apply_lx(&r.g, &mu).unwrap().output, Poly::constant(-Q::one()));
        // The general solver reproduces it.
        assert_eq!(poisson_solve(&Poly::constant(-Q::one()), &cone, &mu, 2).unwrap(), r.g);
    }

    #[test]
    fn finiteness_threshold() {
        let cone = make_cone::<Q>(2).unwrap();
        let mu = generic_mu::<Q>(4, 0);
        assert_eq!(tau_moment_poly(1, &cone, &mu).unwrap_err().code(), "moment-not-finite");
        let c4 = make_cone::<Q>(4).unwrap();
        assert!(tau_moment_poly(1, &c4, &mu).is_ok());
        assert_eq!(tau_moment_poly(2, &c4, &mu).unwrap_err().code(), "moment-not-finite");
    }

    #[test]
    fn zero_rhs_gives_zero() {
        let cone = make_cone::<F256>(5).unwrap();
        let mu = generic_mu::<F256>(4, 1);
        assert!(poisson_solve(&Poly::zero(), &cone, &mu, 4).unwrap().is_zero());
        assert_eq!(poisson_solve(&Poly::zero(), &cone, &mu, 5).unwrap_err().code(), "degree-too-high");
    }

    #[test]
    fn cubic_for_x1_at_pi_over_5() {
        let cone = make_cone::<F256>(5).unwrap();
        let mu = generic_mu::<F256>(3, 2);
        let f = Poly::x1();
        let sol = poisson_solve(&f, &cone, &mu, 3).unwrap();
        assert_eq!(sol.degree(), 3);
        assert!((apply_lx(&sol, &mu).unwrap().output - &f).is_negligible(10.0));
        assert!(cone.vanishes_on_boundary(&sol));
    }

    #[test]
    fn second_moment_at_pi_over_5() {
        let cone = make_cone::<F256>(5).unwrap();
        let mu = generic_mu::<F256>(4, 3);
        let r = tau_moment_poly(2, &cone, &mu).unwrap();
        assert_eq!(r.g.degree(), 4);
        assert!(r.residual.is_negligible(r.g.max_abs_coeff()));
        let q = cone.boundary_quotient(&r.g).expect("divisible by x2(b x1 - x2)");
        assert_eq!(q.degree(), 2);
    }

    #[test]
    fn quadrant_pullback_of_first_moment() {
        let w = builtin_walk(3).unwrap();
        let (tr, mu) = walk_moments::<Q3>(&w, 2).unwrap();
        let g1 = tau_moment_poly(1, &tr.cone, &mu).unwrap().g;
        let pulled = tr.pull_back(&g1);
        assert_eq!(pulled, Poly::monomial(1, 1, Q3::from_int(2)));
        let (x1, x2) = tr.apply((1, 1));
        assert_eq!(g1.eval(&x1, &x2), Q3::from_int(2));
    }

    #[test]
    fn exit_positions() {
        let cone = make_cone::<Q3>(3).unwrap();
        let x = (Q3::from_int(1), Q3::from_int(1));
        let e = exit_position_moments(&cone, (&x.0, &x.1)).unwrap();
        assert_eq!((e.mean1.clone(), e.mean2.clone()), x.clone());
        let g1 = Q3::sqrt_d() - Q3::one();
        assert_eq!(e.second().unwrap(), (Q3::one() + &g1, Q3::one() + &g1));
        // On the boundary G_1 vanishes.
        let b = (Q3::from_int(2), Q3::zero());
        let e = exit_position_moments(&cone, (&b.0, &b.1)).unwrap();
        assert_eq!(e.second().unwrap(), (Q3::from_int(4), Q3::zero()));
        let v = make_cone::<Q3>(2).unwrap();
        assert_eq!(exit_position_moments(&v, (&x.0, &x.1)).unwrap().second().unwrap_err().code(), "angle-out-of-range");
        let h = make_cone::<Q3>(1).unwrap();
        assert_eq!(exit_position_moments(&h, (&x.0, &x.1)).unwrap_err().code(), "angle-out-of-range");
    }
}

//! Lattice jump distributions in quadrant coordinates, the normalizing
//! transform `T`, and exact moment tables of `X = T·Y`.

use std::collections::BTreeMap;

use num_traits::{One, Signed};

use crate::cone::{binomial, Boundary, ConeSpec};
use crate::error::{Error, Result};
use crate::poly::Poly;
use crate::scalar::{BigRational, Scalar};

#[derive(Debug, Clone, PartialEq)]
pub struct Atom {
    pub dy: (i64, i64),
    pub p: BigRational,
}

/// A validated mean-zero jump distribution with finite support.
#[derive(Debug, Clone, PartialEq)]
pub struct Walk {
    atoms: Vec<Atom>,
}

impl Walk {
    pub fn new(atoms: Vec<Atom>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::InvalidWalk("empty support".into()));
        }
        if let Some(a) = atoms.iter().find(|a| !a.p.is_positive()) {
            return Err(Error::InvalidWalk(format!("non-positive probability at {:?}", a.dy)));
        }
        let total: BigRational = atoms.iter().map(|a| a.p.clone()).sum();
        if !total.is_one() {
            return Err(Error::InvalidWalk(format!("probabilities sum to {total}")));
        }
        let w = Walk { atoms };
        if !w.raw_moment(1, 0).is_zero() || !w.raw_moment(0, 1).is_zero() {
            return Err(Error::InvalidWalk("mean is not zero".into()));
        }
        if w.raw_moment(2, 0).is_zero() || w.raw_moment(0, 2).is_zero() {
            return Err(Error::InvalidWalk("a coordinate has zero variance".into()));
        }
        if !w.cov_det().is_positive() {
            return Err(Error::DegenerateCorrelation);
        }
        Ok(w)
    }

    /// Convenience constructor from `(dy1, dy2, num, den)` tuples.
    pub fn from_tuples(atoms: &[(i64, i64, i64, i64)]) -> Result<Self> {
        Self::new(
            atoms
                .iter()
                .map(|&(a, b, n, d)| Atom { dy: (a, b), p: BigRational::new(n.into(), d.into()) })
                .collect(),
        )
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    /// `E[Y1^a Y2^b]`, exact.
    pub fn raw_moment(&self, a: u32, b: u32) -> BigRational {
        self.atoms
            .iter()
            .map(|at| {
                let y1 = BigRational::from_integer(at.dy.0.into());
                let y2 = BigRational::from_integer(at.dy.1.into());
                num_traits::pow(y1, a as usize) * num_traits::pow(y2, b as usize) * &at.p
            })
            .sum()
    }

    fn cov_det(&self) -> BigRational {
        let c = self.raw_moment(1, 1);
        self.raw_moment(2, 0) * self.raw_moment(0, 2) - &c * &c
    }

    /// Correlation coefficient, as `f64`.
    pub fn rho(&self) -> f64 {
        let c = self.raw_moment(1, 1).to_f64();
        c / (self.raw_moment(2, 0).to_f64() * self.raw_moment(0, 2).to_f64()).sqrt()
    }

    /// Probability of the zero jump.
    pub fn p_stay(&self) -> BigRational {
        self.atoms.iter().filter(|a| a.dy == (0, 0)).map(|a| a.p.clone()).sum()
    }
}

/// Jumps never go below −1 in either quadrant coordinate.
pub fn check_no_overshoot(w: &Walk) -> bool {
    w.atoms.iter().all(|a| a.dy.0 >= -1 && a.dy.1 >= -1)
}

/// The normalizing map `X = T·Y` and the wedge it produces.
#[derive(Debug, Clone, PartialEq)]
pub struct Transform<F> {
    pub t: [[F; 2]; 2],
    pub rho: f64,
    /// Geometric opening angle `arccos(−ϱ)`.
    pub alpha: f64,
    /// `arctan(√(1−ϱ²)/ϱ)`, principal branch, for comparison.
    pub alpha_formula: f64,
    pub cone: ConeSpec<F>,
}

impl<F: Scalar> Transform<F> {
    pub fn apply(&self, y: (i64, i64)) -> (F, F) {
        let (a, b) = (F::from_int(y.0), F::from_int(y.1));
        (self.t[0][0].clone() * &a + self.t[0][1].clone() * &b, self.t[1][1].clone() * &b)
    }

    /// `f ∘ T`, i.e. `f` expressed in quadrant coordinates.
    pub fn pull_back(&self, f: &Poly<F>) -> Poly<F> {
        f.compose_linear(&self.t)
    }
}

pub fn build_transform<F: Scalar>(w: &Walk) -> Result<Transform<F>> {
    let v2 = w.raw_moment(0, 2);
    let c = w.raw_moment(1, 1);
    let det = w.cov_det();
    if !det.is_positive() {
        return Err(Error::DegenerateCorrelation);
    }
    let not_rep = |what: &str| Error::NotRepresentable(format!("sqrt({what}) is not in the {} backend", F::backend()));
    let s2 = F::sqrt_rational(&v2).ok_or_else(|| not_rep(&v2.to_string()))?;
    let sd = F::sqrt_rational(&det).ok_or_else(|| not_rep(&det.to_string()))?;
    let cf = F::from_rational(&c);
    let t = [
        [s2.clone() / &sd, -cf.clone() / &(s2.clone() * &sd)],
        [F::zero(), F::one() / &s2],
    ];
    let rho = w.rho();
    let alpha = (-rho).acos();
    let alpha_formula = ((1.0 - rho * rho).sqrt() / rho).atan();
    let boundary = if c.is_zero() { Boundary::Vertical } else { Boundary::Slope(-sd / &cf) };
    let cone = ConeSpec::with_angle(boundary, alpha);
    Ok(Transform { t, rho, alpha, alpha_formula, cone })
}

/// Mixed moments `E[X1^k X2^l]` for `k + l ≤ order`.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentTable<F> {
    pub order: usize,
    mu: BTreeMap<(u32, u32), F>,
}

impl<F: Scalar> MomentTable<F> {
    /// Builds a table, checking completeness and the normalization
    /// `E X = 0`, `E X Xᵀ = I`.
    pub fn new(order: usize, entries: impl IntoIterator<Item = ((u32, u32), F)>) -> Result<Self> {
        if order < 2 {
            return Err(Error::Precondition("moment table order must be at least 2".into()));
        }
        let mu: BTreeMap<_, _> = entries.into_iter().filter(|((k, l), _)| (k + l) as usize <= order).collect();
        for d in 0..=order as u32 {
            for k in 0..=d {
                if !mu.contains_key(&(k, d - k)) {
                    return Err(Error::Precondition(format!("moment table misses entry ({k}, {})", d - k)));
                }
            }
        }
        let t = MomentTable { order, mu };
        t.check_normalized()?;
        Ok(t)
    }

    fn check_normalized(&self) -> Result<()> {
        let expect = [((0, 0), 1), ((1, 0), 0), ((0, 1), 0), ((2, 0), 1), ((0, 2), 1), ((1, 1), 0)];
        for ((k, l), v) in expect {
            if !(self.get(k, l) - F::from_int(v)).is_negligible(1.0) {
                return Err(Error::Precondition(format!("moment ({k}, {l}) must equal {v}")));
            }
        }
        Ok(())
    }

    /// Normalized table whose entries of total degree ≥ 3 are taken from `higher`.
    pub fn with_higher(order: usize, higher: impl Fn(u32, u32) -> F) -> Result<Self> {
        let mut entries = Vec::new();
        for d in 0..=order as u32 {
            for k in 0..=d {
                let l = d - k;
                let v = match (k, l) {
                    (0, 0) | (2, 0) | (0, 2) => F::one(),
                    _ if d <= 2 => F::zero(),
                    _ => higher(k, l),
                };
                entries.push(((k, l), v));
            }
        }
        Self::new(order, entries)
    }

    pub fn get(&self, k: u32, l: u32) -> F {
        self.mu.get(&(k, l)).cloned().unwrap_or_else(|| panic!("moment ({k}, {l}) beyond order {}", self.order))
    }

    pub fn entries(&self) -> impl Iterator<Item = (&(u32, u32), &F)> {
        self.mu.iter()
    }

    pub fn map<G: Scalar>(&self, f: impl Fn(&F) -> G) -> MomentTable<G> {
        MomentTable { order: self.order, mu: self.mu.iter().map(|(&e, v)| (e, f(v))).collect() }
    }

    /// Restriction to a lower order.
    pub fn truncate(&self, order: usize) -> Self {
        MomentTable { order: order.min(self.order), mu: self.mu.iter().filter(|((k, l), _)| (k + l) as usize <= order).map(|(&e, v)| (e, v.clone())).collect() }
    }
}

/// `E[(TY)_1^k (TY)_2^l]` expanded binomially over the raw moments of `Y`.
pub fn push_moments<F: Scalar>(w: &Walk, tr: &Transform<F>, order: usize) -> Result<MomentTable<F>> {
    let [[t11, t12], [_, t22]] = &tr.t;
    let mut raw: BTreeMap<(u32, u32), F> = BTreeMap::new();
    let mut raw_at = |a: u32, b: u32| raw.entry((a, b)).or_insert_with(|| F::from_rational(&w.raw_moment(a, b))).clone();
    let mut entries = Vec::new();
    for d in 0..=order as u32 {
        for k in 0..=d {
            let l = d - k;
            let mut acc = F::zero();
            for a in 0..=k {
                let coef = F::from_int(binomial(k as u64, a as u64) as i64) * &t11.powi(a) * &t12.powi(k - a);
                acc = acc + coef * &raw_at(a, k - a + l);
            }
            entries.push(((k, l), acc * &t22.powi(l)));
        }
    }
    MomentTable::new(order, entries)
}

/// Transform and moment table together.
pub fn walk_moments<F: Scalar>(w: &Walk, order: usize) -> Result<(Transform<F>, MomentTable<F>)> {
    let tr = build_transform::<F>(w)?;
    let mu = push_moments(w, &tr, order)?;
    Ok((tr, mu))
}

/// Built-in no-overshoot walks whose transformed wedge is `K_{π/m}`.
pub fn builtin_walk(m: u32) -> Option<Walk> {
    let atoms: &[(i64, i64, i64, i64)] = match m {
        2 => &[(1, 1, 1, 4), (-1, -1, 1, 4), (1, -1, 1, 4), (-1, 1, 1, 4)],
        3 => &[(1, 1, 1, 8), (-1, -1, 1, 8), (1, -1, 3, 8), (-1, 1, 3, 8)],
        4 => &[(-1, 1, 1, 4), (0, -1, 1, 4), (0, 1, 1, 4), (1, -1, 1, 4)],
        6 => &[(-1, 1, 3, 8), (0, -1, 1, 8), (0, 1, 1, 8), (1, -1, 3, 8)],
        _ => return None,
    };
    Some(Walk::from_tuples(atoms).expect("built-in walk is valid"))
}

pub const BUILTIN_M: [u32; 4] = [2, 3, 4, 6];

/// Simple walk `±e1, ±e2`.
pub fn simple_walk() -> Walk {
    Walk::from_tuples(&[(1, 0, 1, 4), (-1, 0, 1, 4), (0, 1, 1, 4), (0, -1, 1, 4)]).expect("valid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{BigFloat, Quad};
    use proptest::prelude::*;

    type Q = BigRational;
    type Q3 = Quad<3>;

    #[test]
    fn identity_transform() {
        let tr = build_transform::<Q>(&builtin_walk(2).unwrap()).unwrap();
        assert_eq!(tr.t, [[Q::from_int(1), Q::from_int(0)], [Q::from_int(0), Q::from_int(1)]]);
        assert!((tr.alpha - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
        assert_eq!(tr.cone.boundary, Boundary::Vertical);
        assert_eq!(tr.cone.m, Some(2));
    }

    #[test]
    fn diagonal_walk_gives_pi_over_three() {
        let w = builtin_walk(3).unwrap();
        assert!((w.rho() + 0.5).abs() < 1e-15);
        let tr = build_transform::<Q3>(&w).unwrap();
        assert!((tr.alpha - std::f64::consts::FRAC_PI_3).abs() < 1e-14);
        assert_eq!(tr.cone.m, Some(3));
        assert_eq!(tr.cone.slope().unwrap(), &Q3::sqrt_d());
        // Paper formula's principal branch gives a different angle for negative rho.
        assert!((tr.alpha_formula - std::f64::consts::FRAC_PI_3).abs() > 0.1);
    }

    #[test]
    fn positive_rho_transform() {
        // E Y1² = E Y2² = 1, ϱ = 1/2.
        let w = Walk::from_tuples(&[(1, 1, 3, 8), (-1, -1, 3, 8), (1, -1, 1, 8), (-1, 1, 1, 8)]).unwrap();
        let tr = build_transform::<Q3>(&w).unwrap();
        let third = Q::new(1.into(), 3.into());
        let z = Q::from_int(0);
        assert_eq!(tr.t[0][0], Q3::new(z.clone(), third.clone() * Q::from_int(2)));
        assert_eq!(tr.t[0][1], Q3::new(z.clone(), -third));
        assert_eq!(tr.t[1][1], Q3::one());
        assert!((tr.alpha - 2.0 * std::f64::consts::FRAC_PI_3).abs() < 1e-14);
    }

    #[test]
    fn builtin_walks_have_expected_angles() {
        fn angle<F: Scalar>(m: u32) -> ConeSpec<F> {
            build_transform::<F>(&builtin_walk(m).unwrap()).unwrap().cone
        }
        assert_eq!(angle::<Q>(4).m, Some(4));
        assert_eq!(angle::<Q>(4).boundary, Boundary::Slope(Q::from_int(1)));
        assert_eq!(angle::<Q3>(6).m, Some(6));
        assert_eq!(angle::<Q3>(6).boundary, crate::cone::make_cone::<Q3>(6).unwrap().boundary);
        for m in BUILTIN_M {
            assert!(check_no_overshoot(&builtin_walk(m).unwrap()));
        }
    }

    #[test]
    fn invalid_walks_are_rejected() {
        assert_eq!(Walk::from_tuples(&[(1, 0, 1, 2), (0, 1, 1, 2)]).unwrap_err().code(), "invalid-walk");
        assert_eq!(Walk::from_tuples(&[(1, 1, 1, 2), (-1, -1, 1, 2)]).unwrap_err(), Error::DegenerateCorrelation);
        assert_eq!(Walk::from_tuples(&[(1, 0, 1, 4), (-1, 0, 1, 4)]).unwrap_err().code(), "invalid-walk");
    }

    #[test]
    fn overshoot_examples() {
        assert!(check_no_overshoot(&builtin_walk(3).unwrap()));
        let bad = Walk::from_tuples(&[(-2, 0, 1, 4), (2, 0, 1, 4), (0, 1, 1, 4), (0, -1, 1, 4)]).unwrap();
        assert!(!check_no_overshoot(&bad));
        let w = Walk::from_tuples(&[(5, -1, 1, 7), (-1, 0, 5, 7), (0, 1, 1, 7)]).unwrap();
        assert!(check_no_overshoot(&w));
    }

    /// Oracle: sum over atoms of (T dy)_1^k (T dy)_2^l directly.
    fn brute_moment<F: Scalar>(w: &Walk, tr: &Transform<F>, k: u32, l: u32) -> F {
        w.atoms().iter().fold(F::zero(), |acc, a| {
            let (x1, x2) = tr.apply(a.dy);
            acc + x1.powi(k) * &x2.powi(l) * &F::from_rational(&a.p)
        })
    }

    #[test]
    fn moments_match_brute_force() {
        let w = builtin_walk(3).unwrap();
        let (tr, mu) = walk_moments::<Q3>(&w, 6).unwrap();
        for ((k, l), v) in mu.entries() {
            assert_eq!(v, &brute_moment(&w, &tr, *k, *l), "({k},{l})");
        }
        let s = simple_walk();
        let (_, mu) = walk_moments::<Quad<2>>(&s, 4).unwrap();
        assert!(mu.get(3, 0).is_zero());
    }

    #[test]
    fn float_backend_moments() {
        let (_, mu) = walk_moments::<BigFloat<256>>(&builtin_walk(3).unwrap(), 4).unwrap();
        assert!((mu.get(2, 0).to_f64() - 1.0).abs() < 1e-60);
    }

    #[test]
    fn unrepresentable_sqrt_is_reported() {
        assert_eq!(build_transform::<Q>(&builtin_walk(3).unwrap()).unwrap_err().code(), "not-representable");
    }

    /// Random valid walks: a symmetric support `±v_i` with integer weights.
    fn arb_walk() -> impl Strategy<Value = Walk> {
        prop::collection::vec(((-2i64..=2, -2i64..=2), 1i64..5), 2..5).prop_filter_map("degenerate", |vs| {
            let total: i64 = vs.iter().map(|(_, w)| 2 * w).sum();
            let atoms: Vec<(i64, i64, i64, i64)> = vs
                .iter()
                .flat_map(|&((a, b), w)| [(a, b, w, total), (-a, -b, w, total)])
                .collect();
            Walk::from_tuples(&atoms).ok()
        })
    }

    proptest! {
        #[test]
        fn normalization_is_exact(w in arb_walk()) {
            // The float backend handles any sqrt; exactness is checked in Q(√d) when representable.
            let (_, mu) = walk_moments::<BigFloat<256>>(&w, 2).unwrap();
            prop_assert!((mu.get(2, 0).to_f64() - 1.0).abs() < 1e-60);
            for d in [2u32, 3, 5, 6, 7] {
                let res = match d {
                    2 => walk_moments::<Quad<2>>(&w, 3).map(|_| ()),
                    3 => walk_moments::<Quad<3>>(&w, 3).map(|_| ()),
                    5 => walk_moments::<Quad<5>>(&w, 3).map(|_| ()),
                    6 => walk_moments::<Quad<6>>(&w, 3).map(|_| ()),
                    _ => walk_moments::<Quad<7>>(&w, 3).map(|_| ()),
                };
                // MomentTable::new re-checks Eq. (1) exactly; any error other than
                // not-representable would be a normalization failure.
                if let Err(e) = res {
                    prop_assert_eq!(e.code(), "not-representable");
                }
            }
        }

        #[test]
        fn overshoot_check_is_monotone(w in arb_walk(), drop in 0usize..8) {
            if check_no_overshoot(&w) {
                let mut atoms = w.atoms().to_vec();
                if atoms.len() > 1 {
                    atoms.remove(drop % atoms.len());
                }
                prop_assert!(atoms.iter().all(|a| a.dy.0 >= -1 && a.dy.1 >= -1));
            }
        }

        #[test]
        fn pull_back_commutes_with_lattice(w in arb_walk(), y1 in -5i64..5, y2 in -5i64..5,
                                          cs in prop::collection::vec(-4i64..4, 6)) {
            type F = BigFloat<256>;
            let tr = build_transform::<F>(&w).unwrap();
            let f = Poly::<F>::from_terms([((2, 0), cs[0]), ((1, 1), cs[1]), ((0, 2), cs[2]), ((3, 0), cs[3]), ((0, 1), cs[4]), ((0, 0), cs[5])]
                .into_iter().map(|(e, c)| (e, F::from_int(c))));
            let (x1, x2) = tr.apply((y1, y2));
            let direct = f.eval(&x1, &x2);
            let pulled = tr.pull_back(&f).eval(&F::from_int(y1), &F::from_int(y2));
            prop_assert!((direct - pulled).is_negligible(1e4));
        }
    }

    #[test]
    fn pull_back_exact_in_quadratic_field() {
        let w = builtin_walk(6).unwrap();
        let tr = build_transform::<Q3>(&w).unwrap();
        let f = crate::cone::u_poly::<Q3>(6);
        let g = tr.pull_back(&f);
        for y in [(1, 1), (2, 3), (-4, 7), (5, -2)] {
            let (x1, x2) = tr.apply(y);
            assert_eq!(f.eval(&x1, &x2), g.eval(&Q3::from_int(y.0), &Q3::from_int(y.1)));
        }
    }
}

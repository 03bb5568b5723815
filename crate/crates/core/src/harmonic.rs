//! Discrete harmonic polynomials `h = u_m + r_m` vanishing on `∂K_{π/m}`.

use crate::cone::{binomial, u_poly, Boundary, ConeSpec};
use crate::error::{Error, Result};
use crate::laplace::{build_matrix, build_matrix_for, kernel_dimension, solve_homogeneous, solve_split};
use crate::lx::apply_lx;
use crate::poly::Poly;
use crate::scalar::Scalar;
use crate::walk::{MomentTable, Transform};

#[derive(Debug, Clone, PartialEq)]
pub struct HarmonicResult<F: Scalar> {
    pub m: u32,
    pub h: Poly<F>,
    /// `h − u_m`, degree at most `m − 1`.
    pub correction: Poly<F>,
    /// `L_X h`; zero (or negligible) on success.
    pub residual: Poly<F>,
    pub residual_max: f64,
    pub boundary_ok: bool,
}

/// Adds homogeneous corrections of degrees `top, top−1, …, 2` to `start` so
/// that `L_X(result) = target`. Each degree `d` solves
/// `½ΔF_d = [target − L_X(current)]_(d−2)` with zero boundary values.
pub(crate) fn descend<F: Scalar>(
    start: Poly<F>,
    target: &Poly<F>,
    top: usize,
    cone: &ConeSpec<F>,
    mu: &MomentTable<F>,
    on_singular: impl Fn(usize) -> Error,
) -> Result<Poly<F>> {
    let mut h = start;
    for d in (2..=top).rev() {
        let lx = apply_lx(&h, mu)?.output;
        let g = (target.clone() - &lx).homogeneous_part(d as u32 - 2);
        let part = solve_homogeneous(d, cone, &g).map_err(|e| match e {
            Error::SingularAngle { n } => on_singular(n),
            other => other,
        })?;
        h = h + part;
    }
    Ok(h)
}

fn check_cone<F: Scalar>(m: u32, cone: &ConeSpec<F>) -> Result<()> {
    if cone.m != Some(m) {
        return Err(Error::Precondition(format!("cone has p_alpha = {}, expected m = {m}", cone.p_alpha)));
    }
    Ok(())
}

fn finish<F: Scalar>(m: u32, h: Poly<F>, cone: &ConeSpec<F>, mu: &MomentTable<F>) -> Result<HarmonicResult<F>> {
    let residual = apply_lx(&h, mu)?.output;
    let correction = h.clone() - u_poly::<F>(m);
    let scale = h.max_abs_coeff().max(mu.entries().map(|(_, v)| v.to_f64().abs()).fold(1.0, f64::max));
    if !residual.is_negligible(scale) {
        return Err(Error::ResonantSubdegree { degree: residual.degree().max(0) as usize });
    }
    Ok(HarmonicResult {
        m,
        boundary_ok: cone.vanishes_on_boundary(&h),
        residual_max: residual.max_abs_coeff(),
        correction,
        residual,
        h,
    })
}

/// Builds `h` degree by degree from the top part `u_m`.
pub fn construct_harmonic<F: Scalar>(m: u32, cone: &ConeSpec<F>, mu: &MomentTable<F>) -> Result<HarmonicResult<F>> {
    check_cone(m, cone)?;
    if (mu.order as u32) < m {
        return Err(Error::InsufficientMoments { have: mu.order, need: m as usize });
    }
    if m == 1 {
        return finish(1, Poly::x2(), cone, mu);
    }
    let h = descend(u_poly::<F>(m), &Poly::zero(), m as usize - 1, cone, mu, |degree| Error::ResonantSubdegree { degree })?;
    finish(m, h, cone, mu)
}

/// Same construction with the right-hand sides accumulated coefficient by
/// coefficient from the already built parts `a_{i,j}`,
/// `c_{n−2,s} = −Σ_{i>n} Σ_j C(j,s) C(i−j, n−2−s) E[X2^(j−s) X1^(i−j−n+2+s)] a_{i,j}`,
/// and solved with the even/odd split.
pub fn construct_harmonic_alg1<F: Scalar>(m: u32, cone: &ConeSpec<F>, mu: &MomentTable<F>) -> Result<Poly<F>> {
    check_cone(m, cone)?;
    if (mu.order as u32) < m {
        return Err(Error::InsufficientMoments { have: mu.order, need: m as usize });
    }
    if m == 1 {
        return Ok(Poly::x2());
    }
    let mut parts: Vec<Vec<F>> = vec![Vec::new(); m as usize + 1];
    parts[m as usize] = u_poly::<F>(m).hom_coeffs(m);
    for n in (2..m as usize).rev() {
        let mut c = vec![F::zero(); n + 1];
        for (s, cs) in c.iter_mut().enumerate().take(n - 1) {
            for (i, a) in parts.iter().enumerate().skip(n + 1) {
                for (j, aij) in a.iter().enumerate() {
                    if j < s || i - j + s + 2 < n {
                        continue;
                    }
                    let w = binomial(j as u64, s as u64) * binomial((i - j) as u64, (n - 2 - s) as u64);
                    if w == 0 {
                        continue;
                    }
                    let mom = mu.get((i - j + s + 2 - n) as u32, (j - s) as u32);
                    *cs = cs.clone() - F::from_int(w as i64) * &mom * aij;
                }
            }
        }
        let mat = build_matrix(n, cone)?;
        parts[n] = solve_split(&mat, &c).map_err(|e| match e {
            Error::SingularAngle { n } => Error::ResonantSubdegree { degree: n },
            other => other,
        })?;
    }
    let mut h = Poly::zero();
    for (n, a) in parts.iter().enumerate().skip(2) {
        h = h + Poly::from_hom_coeffs(n as u32, a);
    }
    Ok(h)
}

/// True iff `f` is zero, given that `f` has degree below `m`, vanishes on
/// both rays and is `L_X`-harmonic.
pub fn check_low_degree_uniqueness<F: Scalar>(m: u32, cone: &ConeSpec<F>, mu: &MomentTable<F>, f: &Poly<F>) -> Result<bool> {
    if f.degree() >= m as i64 {
        return Err(Error::Precondition(format!("degree {} is not below m = {m}", f.degree())));
    }
    if !cone.vanishes_on_boundary(f) {
        return Err(Error::Precondition("f does not vanish on both rays".into()));
    }
    let scale = f.max_abs_coeff();
    if !apply_lx(f, mu)?.output.is_negligible(scale) {
        return Err(Error::Precondition("f is not L_X-harmonic".into()));
    }
    Ok(f.is_negligible(1.0))
}

#[derive(Debug, Clone, PartialEq)]
pub enum AngleClass {
    Nonresonant,
    /// `b = tan(qπ/n)`; `positive` reports whether `u_n > 0` in the open wedge.
    Resonant { q: u32, positive: bool },
}

/// Whether a degree-`n` polynomial with harmonic top part can vanish on both
/// rays, and if so which `q` the ray angle corresponds to.
pub fn converse_angle_test<F: Scalar>(n: usize, boundary: &Boundary<F>) -> Result<AngleClass> {
    let mat = build_matrix_for(n, boundary)?;
    if kernel_dimension(&mat).0 == 0 {
        return Ok(AngleClass::Nonresonant);
    }
    let beta = match boundary {
        Boundary::Slope(b) => {
            let t = b.to_f64().atan();
            if t > 0.0 { t } else { std::f64::consts::PI + t }
        }
        Boundary::Vertical => std::f64::consts::FRAC_PI_2,
        Boundary::HalfPlane => std::f64::consts::PI,
    };
    let q = (beta * n as f64 / std::f64::consts::PI).round() as u32;
    let u = u_poly::<F>(n as u32);
    let positive = (1..64).all(|k| {
        let phi = beta * k as f64 / 64.0;
        u.eval_f64(phi.cos(), phi.sin()) > 0.0
    });
    Ok(AngleClass::Resonant { q, positive })
}

/// Sign check of `h` at the lattice points `T·y`, `y ∈ Z²_{≥0}`, with
/// `|T·y| ≤ radius`. Returns (points checked, points with `h < 0`).
pub fn positivity_check<F: Scalar>(h: &Poly<F>, tr: &Transform<F>, radius: f64) -> (usize, Vec<(i64, i64)>) {
    let g = tr.pull_back(h);
    let t: [[f64; 2]; 2] = [
        [tr.t[0][0].to_f64(), tr.t[0][1].to_f64()],
        [tr.t[1][0].to_f64(), tr.t[1][1].to_f64()],
    ];
    let det = t[0][0] * t[1][1] - t[0][1] * t[1][0];
    let inv_norm = (t.iter().flatten().map(|v| v * v).sum::<f64>()).sqrt() / det.abs();
    let ymax = (radius * inv_norm).ceil() as i64 + 1;
    let scale = g.max_abs_coeff() * (radius.max(1.0)).powi(g.degree().max(0) as i32);
    let mut checked = 0;
    let mut negative = Vec::new();
    for y1 in 0..=ymax {
        for y2 in 0..=ymax {
            let x1 = t[0][0] * y1 as f64 + t[0][1] * y2 as f64;
            let x2 = t[1][1] * y2 as f64;
            if x1.hypot(x2) > radius {
                continue;
            }
            checked += 1;
            let v = g.eval(&F::from_int(y1), &F::from_int(y2));
            if v.sign() < 0 && !v.is_negligible(scale) {
                negative.push((y1, y2));
            }
        }
    }
    (checked, negative)
}

//! The boundary-augmented matrices `M_{n,b}`: `½Δ` on degree-`n` homogeneous
//! polynomials plus the two ray conditions.
//!
//! Coefficients are ordered in the basis `v_{n,i} = x2^i x1^(n−i)`.

use crate::cone::{binomial, u_poly, Boundary, ConeSpec};
use crate::error::{Error, Result};
use crate::linalg::{self, Matrix};
use crate::poly::Poly;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryMatrix<F: Scalar> {
    pub n: usize,
    pub boundary: Boundary<F>,
    /// `(n+1) × (n+1)`: `n−1` Laplacian rows, then `x2 = 0`, then the second ray.
    pub rows: Matrix<F>,
}

fn c2<F: Scalar>(k: usize) -> F {
    F::from_int(binomial(k as u64, 2) as i64)
}

pub fn build_matrix<F: Scalar>(n: usize, cone: &ConeSpec<F>) -> Result<BoundaryMatrix<F>> {
    build_matrix_for(n, &cone.boundary)
}

pub fn build_matrix_for<F: Scalar>(n: usize, boundary: &Boundary<F>) -> Result<BoundaryMatrix<F>> {
    if n < 2 {
        return Err(Error::Precondition(format!("M_n needs n >= 2, got {n}")));
    }
    let mut rows = vec![vec![F::zero(); n + 1]; n + 1];
    for r in 0..=n - 2 {
        rows[r][r] = c2(n - r);
        rows[r][r + 2] = c2(r + 2);
    }
    rows[n - 1][0] = F::one();
    match boundary {
        Boundary::Slope(b) => {
            let mut p = F::one();
            for i in 0..=n {
                rows[n][i] = p.clone();
                p = p * b;
            }
        }
        Boundary::Vertical => rows[n][n] = F::one(),
        Boundary::HalfPlane => rows[n][0] = if n % 2 == 0 { F::one() } else { -F::one() },
    }
    Ok(BoundaryMatrix { n, boundary: boundary.clone(), rows })
}

impl<F: Scalar> BoundaryMatrix<F> {
    fn check_rhs(&self, rhs: &[F]) -> Result<()> {
        if rhs.len() != self.n + 1 {
            return Err(Error::Precondition(format!("rhs must have length {}", self.n + 1)));
        }
        if !rhs[self.n - 1].is_zero() || !rhs[self.n].is_zero() {
            return Err(Error::Precondition("boundary entries of the rhs must be zero".into()));
        }
        Ok(())
    }

    /// Right-hand side for `½ΔF = g` with `g` homogeneous of degree `n−2`.
    pub fn rhs_for(&self, g: &Poly<F>) -> Vec<F> {
        let mut v = g.hom_coeffs(self.n as u32 - 2);
        v.extend([F::zero(), F::zero()]);
        v
    }
}

/// General elimination.
pub fn solve_system<F: Scalar>(m: &BoundaryMatrix<F>, rhs: &[F]) -> Result<Vec<F>> {
    m.check_rhs(rhs)?;
    linalg::solve(&m.rows, rhs).ok_or(Error::SingularAngle { n: m.n })
}

/// Kernel dimension and, when nontrivial, one kernel vector.
pub fn kernel_dimension<F: Scalar>(m: &BoundaryMatrix<F>) -> (usize, Option<Vec<F>>) {
    let k = linalg::kernel(&m.rows);
    (k.len(), k.into_iter().next())
}

#[derive(Debug, Clone, PartialEq)]
pub struct OddTriangularization<F> {
    /// `λ_1, …, λ_N`.
    pub lambdas: Vec<F>,
    /// `θ_0 = b, θ_1, …, θ_N`; the last one is the final pivot.
    pub thetas: Vec<F>,
}

impl<F: Scalar> OddTriangularization<F> {
    pub fn theta(&self) -> &F {
        self.thetas.last().expect("theta_0 always present")
    }
}

/// Number of Laplacian rows acting on odd-indexed coefficients: `⌊(n−1)/2⌋`.
pub fn odd_row_count(n: usize) -> usize {
    (n - 1) / 2
}

/// Eliminates the odd unknowns from the second-ray row using the odd Laplacian
/// rows: `λ_1 = −b/C(n−1,2)`, `θ_k = b^(2k+1) + λ_k C(2k+1,2)`,
/// `λ_(k+1) = −θ_k / C(n−2k−1,2)`.
pub fn triangularize_odd<F: Scalar>(m: &BoundaryMatrix<F>) -> Result<OddTriangularization<F>> {
    let Boundary::Slope(b) = &m.boundary else {
        return Err(Error::Precondition("the odd elimination needs a finite slope b".into()));
    };
    let n = m.n;
    let big_n = odd_row_count(n);
    let mut lambdas = Vec::with_capacity(big_n);
    let mut thetas = vec![b.clone()];
    for k in 1..=big_n {
        let lambda = -thetas[k - 1].clone() / &c2::<F>(n - 2 * k + 1);
        let theta = b.powi(2 * k as u32 + 1) + lambda.clone() * &c2::<F>(2 * k + 1);
        lambdas.push(lambda);
        thetas.push(theta);
    }
    Ok(OddTriangularization { lambdas, thetas })
}

/// Even/odd split solver: even coefficients by forward recursion, odd ones by
/// the triangularized system and back substitution.
pub fn solve_split<F: Scalar>(m: &BoundaryMatrix<F>, rhs: &[F]) -> Result<Vec<F>> {
    m.check_rhs(rhs)?;
    let Boundary::Slope(b) = &m.boundary else {
        return solve_system(m, rhs);
    };
    let n = m.n;
    let c = &rhs[..n - 1];
    let mut a = vec![F::zero(); n + 1];
    let mut k = 1;
    while 2 * k <= n {
        a[2 * k] = (c[2 * k - 2].clone() - c2::<F>(n - 2 * k + 2) * &a[2 * k - 2]) / &c2::<F>(2 * k);
        k += 1;
    }
    let mut r = F::zero();
    for i in (0..=n).step_by(2) {
        r = r - b.powi(i as u32) * &a[i];
    }
    let tri = triangularize_odd(m)?;
    let big_n = tri.lambdas.len();
    let theta = tri.theta();
    let scale = (0..=n).map(|i| b.powi(i as u32).to_f64().abs()).fold(1.0, f64::max);
    if theta.is_negligible(scale) {
        return Err(Error::SingularAngle { n });
    }
    // z_i = a_{2i−1}, i = 1..=N+1.
    let mut z = vec![F::zero(); big_n + 2];
    let mut last = r;
    for (k, lambda) in tri.lambdas.iter().enumerate() {
        last = last + lambda.clone() * &c[2 * k + 1];
    }
    z[big_n + 1] = last / theta;
    for i in (1..=big_n).rev() {
        z[i] = (c[2 * i - 1].clone() - c2::<F>(2 * i + 1) * &z[i + 1]) / &c2::<F>(n - 2 * i + 1);
    }
    for i in 1..=big_n + 1 {
        a[2 * i - 1] = z[i].clone();
    }
    Ok(a)
}

/// Homogeneous `F` of degree `n` with `½ΔF = g` and `F = 0` on both rays.
pub fn solve_homogeneous<F: Scalar>(n: usize, cone: &ConeSpec<F>, g: &Poly<F>) -> Result<Poly<F>> {
    let m = build_matrix(n, cone)?;
    let a = solve_system(&m, &m.rhs_for(g))?;
    Ok(Poly::from_hom_coeffs(n as u32, &a))
}

/// `u_n(1, b)`, the quantity the final pivot is tied to.
pub fn u_at_one_b<F: Scalar>(n: usize, b: &F) -> F {
    u_poly::<F>(n as u32).eval(&F::one(), b)
}

//! Small dense linear algebra over a [`Scalar`] field.
//!
//! Exact backends use fraction-free (Bareiss) elimination; the float backend
//! uses Gaussian elimination with partial pivoting.

use crate::scalar::Scalar;

pub type Matrix<F> = Vec<Vec<F>>;

/// Largest entry of each row over the first `cols` columns.
fn row_scales<F: Scalar>(a: &Matrix<F>, cols: usize) -> Vec<f64> {
    a.iter().map(|r| r[..cols].iter().map(|v| v.to_f64().abs()).fold(0.0, f64::max)).collect()
}

/// Scaled partial pivoting: candidates are compared relative to their row scale.
fn pick_pivot<F: Scalar>(a: &Matrix<F>, col: usize, from: usize, scales: &[f64]) -> Option<usize> {
    if F::EXACT {
        (from..a.len()).find(|&r| !a[r][col].is_zero())
    } else {
        let rel = |r: usize| a[r][col].to_f64().abs() / scales[r].max(f64::MIN_POSITIVE);
        let best = (from..a.len()).max_by(|&x, &y| rel(x).partial_cmp(&rel(y)).unwrap_or(std::cmp::Ordering::Equal))?;
        (!a[best][col].is_negligible(scales[best])).then_some(best)
    }
}

/// Solves the square system `a·x = rhs`; `None` if singular.
pub fn solve<F: Scalar>(a: &Matrix<F>, rhs: &[F]) -> Option<Vec<F>> {
    let n = a.len();
    assert!(a.iter().all(|r| r.len() == n) && rhs.len() == n, "square system expected");
    let mut m: Matrix<F> = a.iter().zip(rhs).map(|(r, b)| r.iter().cloned().chain([b.clone()]).collect()).collect();
    if F::EXACT {
        bareiss_forward(&mut m)?;
    } else {
        gauss_forward(&mut m)?;
    }
    // Back substitution on the upper-triangular augmented matrix.
    let mut x = vec![F::zero(); n];
    for i in (0..n).rev() {
        let mut s = m[i][n].clone();
        for j in i + 1..n {
            s = s - m[i][j].clone() * &x[j];
        }
        x[i] = s / &m[i][i];
    }
    Some(x)
}

/// Bareiss elimination on an augmented `n × (n+1)` matrix.
fn bareiss_forward<F: Scalar>(m: &mut Matrix<F>) -> Option<()> {
    let n = m.len();
    let w = m[0].len();
    let mut prev = F::one();
    for k in 0..n {
        let p = pick_pivot(m, k, k, &[])?;
        m.swap(k, p);
        for i in k + 1..n {
            for j in k + 1..w {
                let v = (m[k][k].clone() * &m[i][j] - m[i][k].clone() * &m[k][j]) / &prev;
                m[i][j] = v;
            }
            m[i][k] = F::zero();
        }
        prev = m[k][k].clone();
    }
    Some(())
}

fn gauss_forward<F: Scalar>(m: &mut Matrix<F>) -> Option<()> {
    let n = m.len();
    let w = m[0].len();
    let mut scales = row_scales(m, n);
    for k in 0..n {
        let p = pick_pivot(m, k, k, &scales)?;
        m.swap(k, p);
        scales.swap(k, p);
        for i in k + 1..n {
            let f = m[i][k].clone() / &m[k][k];
            for j in k..w {
                let v = m[i][j].clone() - f.clone() * &m[k][j];
                m[i][j] = v;
            }
        }
    }
    Some(())
}

/// Reduced row echelon form; returns the pivot columns.
pub fn rref<F: Scalar>(a: &mut Matrix<F>) -> Vec<usize> {
    let rows = a.len();
    let cols = a.first().map_or(0, Vec::len);
    let mut scales = row_scales(a, cols);
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = pick_pivot(a, c, r, &scales) else { continue };
        a.swap(r, p);
        scales.swap(r, p);
        let inv = F::one() / &a[r][c];
        for j in 0..cols {
            a[r][j] = a[r][j].clone() * &inv;
        }
        for i in 0..rows {
            if i != r && !a[i][c].is_zero() {
                let f = a[i][c].clone();
                for j in 0..cols {
                    let v = a[i][j].clone() - f.clone() * &a[r][j];
                    a[i][j] = v;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

/// Basis of the null space.
pub fn kernel<F: Scalar>(a: &Matrix<F>) -> Vec<Vec<F>> {
    let cols = a.first().map_or(0, Vec::len);
    let mut m = a.clone();
    let pivots = rref(&mut m);
    let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![F::zero(); cols];
            v[f] = F::one();
            for (r, &pc) in pivots.iter().enumerate() {
                v[pc] = -m[r][f].clone();
            }
            v
        })
        .collect()
}

pub fn mat_vec<F: Scalar>(a: &Matrix<F>, x: &[F]) -> Vec<F> {
    a.iter().map(|r| r.iter().zip(x).fold(F::zero(), |s, (u, v)| s + u.clone() * v)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{BigFloat, BigRational};
    use proptest::prelude::*;

    type Q = BigRational;

    fn qm(rows: &[&[i64]]) -> Matrix<Q> {
        rows.iter().map(|r| r.iter().map(|&v| Q::from_int(v)).collect()).collect()
    }

    #[test]
    fn solves_small_system() {
        let a = qm(&[&[0, 2, 1], &[1, 1, 0], &[3, 0, 1]]);
        let b: Vec<Q> = [5, 2, 6].iter().map(|&v| Q::from_int(v)).collect();
        let x = solve(&a, &b).unwrap();
        assert_eq!(mat_vec(&a, &x), b);
    }

    #[test]
    fn singular_is_detected() {
        let a = qm(&[&[1, 2], &[2, 4]]);
        assert!(solve(&a, &[Q::from_int(1), Q::from_int(0)]).is_none());
        let k = kernel(&a);
        assert_eq!(k.len(), 1);
        assert!(mat_vec(&a, &k[0]).iter().all(|v| v.is_zero()));
    }

    proptest! {
        #[test]
        fn exact_solve_residual_is_zero(vals in prop::collection::vec(-9i64..9, 16), rhs in prop::collection::vec(-9i64..9, 4)) {
            let a: Matrix<Q> = vals.chunks(4).map(|r| r.iter().map(|&v| Q::from_int(v)).collect()).collect();
            let b: Vec<Q> = rhs.iter().map(|&v| Q::from_int(v)).collect();
            match solve(&a, &b) {
                Some(x) => prop_assert_eq!(mat_vec(&a, &x), b),
                None => prop_assert!(!kernel(&a).is_empty()),
            }
        }

        #[test]
        fn float_solve_agrees_with_exact(vals in prop::collection::vec(-9i64..9, 9), rhs in prop::collection::vec(-9i64..9, 3)) {
            type F = BigFloat<256>;
            let a: Matrix<Q> = vals.chunks(3).map(|r| r.iter().map(|&v| Q::from_int(v)).collect()).collect();
            let b: Vec<Q> = rhs.iter().map(|&v| Q::from_int(v)).collect();
            if let Some(x) = solve(&a, &b) {
                let af: Matrix<F> = a.iter().map(|r| r.iter().map(F::from_rational).collect()).collect();
                let bf: Vec<F> = b.iter().map(F::from_rational).collect();
                let xf = solve(&af, &bf).unwrap();
                for (u, v) in x.iter().zip(&xf) {
                    prop_assert!((u.to_f64() - v.to_f64()).abs() <= 1e-12 * u.to_f64().abs().max(1.0));
                }
            }
        }
    }
}

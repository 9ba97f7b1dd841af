//! Dense LU with partial pivoting and a 1-norm condition estimate.

use nalgebra::{DMatrix, DVector, Dyn, LU};

use crate::error::{Error, Result};

/// Factorization `P A = L U` that also supports solves with `A^t`.
#[derive(Clone, Debug)]
pub struct DenseLu {
    lu: LU<f64, Dyn, Dyn>,
    l: DMatrix<f64>,
    u: DMatrix<f64>,
    norm1: f64,
}

/// Largest column sum.
pub fn norm1(a: &DMatrix<f64>) -> f64 {
    a.column_iter()
        .map(|c| c.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

impl DenseLu {
    /// Factors `a`; fails with [`Error::SingularSystem`] on an exactly zero pivot.
    pub fn new(a: DMatrix<f64>) -> Result<Self> {
        assert!(a.is_square(), "LU of a non-square matrix");
        let norm1 = norm1(&a);
        let lu = a.lu();
        let u = lu.u();
        if u.diagonal().iter().any(|d| *d == 0.0 || !d.is_finite()) {
            return Err(Error::SingularSystem {
                condition: f64::INFINITY,
            });
        }
        let l = lu.l();
        Ok(Self { lu, l, u, norm1 })
    }

    pub fn dim(&self) -> usize {
        self.u.nrows()
    }

    pub fn solve(&self, b: &DVector<f64>) -> DVector<f64> {
        self.lu.solve(b).expect("factorization checked for zero pivots")
    }

    /// Solves `A^t x = b`.
    pub fn solve_transpose(&self, b: &DVector<f64>) -> DVector<f64> {
        // A^t = U^t L^t P, so U^t L^t (P x) = b.
        let y = self
            .u
            .tr_solve_upper_triangular(b)
            .expect("non-zero pivots");
        let mut w = self
            .l
            .tr_solve_lower_triangular(&y)
            .expect("unit diagonal");
        self.lu.p().inv_permute_rows(&mut w);
        w
    }

    /// Hager-Higham estimate of `||A||_1 ||A^{-1}||_1` (a lower bound that
    /// is usually within a small factor of the true value).
    pub fn condition_estimate(&self) -> f64 {
        let n = self.dim();
        if n == 0 {
            return 0.0;
        }
        let mut x = DVector::from_element(n, 1.0 / n as f64);
        let mut est = 0.0;
        for iter in 0..5 {
            let y = self.solve(&x);
            let ynorm = y.lp_norm(1);
            if iter > 0 && ynorm <= est {
                break;
            }
            est = ynorm;
            let xi = y.map(|v| if v >= 0.0 { 1.0 } else { -1.0 });
            let z = self.solve_transpose(&xi);
            let (j, zj) = z.iter().enumerate().fold((0, 0.0), |acc, (i, v)| {
                if v.abs() > acc.1 {
                    (i, v.abs())
                } else {
                    acc
                }
            });
            if zj <= z.dot(&x) {
                break;
            }
            x = DVector::zeros(n);
            x[j] = 1.0;
        }
        // alternating test vector guards against the estimator's blind spots
        let alt = DVector::from_fn(n, |i, _| {
            let s = if i % 2 == 0 { 1.0 } else { -1.0 };
            s * (1.0 + i as f64 / (n.max(2) - 1) as f64)
        });
        let alt_est = 2.0 * self.solve(&alt).lp_norm(1) / (3.0 * n as f64);
        self.norm1 * est.max(alt_est)
    }
}

/// Smallest and largest singular values.
pub fn singular_value_range(a: &DMatrix<f64>) -> (f64, f64) {
    let sv = a.clone().svd(false, false).singular_values;
    let max = sv.iter().cloned().fold(0.0, f64::max);
    let min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    (min, max)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> DMatrix<f64> {
        DMatrix::from_row_slice(3, 3, &[4.0, 1.0, -2.0, 0.5, 3.0, 1.0, 2.0, -1.0, 5.0])
    }

    #[test]
    fn solves_and_transpose_solves() {
        let a = sample();
        let lu = DenseLu::new(a.clone()).unwrap();
        let b = DVector::from_vec(vec![1.0, -2.0, 0.5]);
        assert!((&a * lu.solve(&b) - &b).amax() < 1e-14);
        assert!((a.transpose() * lu.solve_transpose(&b) - &b).amax() < 1e-14);
    }

    #[test]
    fn condition_estimate_matches_exact_for_small_matrix() {
        let a = sample();
        let exact = norm1(&a) * norm1(&a.clone().try_inverse().unwrap());
        let est = DenseLu::new(a).unwrap().condition_estimate();
        assert!(est <= exact * (1.0 + 1e-12) && est >= 0.3 * exact, "{est} vs {exact}");
    }

    #[test]
    fn ill_conditioning_is_visible() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0 + 1e-14]);
        assert!(DenseLu::new(a).unwrap().condition_estimate() > 1e13);
        let z = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 4.0]);
        assert!(matches!(DenseLu::new(z), Err(Error::SingularSystem { .. })));
    }
}

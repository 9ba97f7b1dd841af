use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, Matrix2, Vector2};

use super::{unit_sphere_area, LameEnv};
use crate::error::{Error, Result};

/// `grad[k][(i, j)] = d_k Gamma_ij`
pub type Grad2 = [Matrix2<f64>; 2];

fn check_point(x: &[f64]) -> Result<f64> {
    let r2: f64 = x.iter().map(|v| v * v).sum();
    if r2 == 0.0 {
        return Err(Error::SingularArgument);
    }
    if x.len() != 2 && x.len() != 3 {
        return Err(Error::UnsupportedDimension(x.len()));
    }
    Ok(r2.sqrt())
}

/// Fundamental solution of the Laplacian, `(1/2pi) ln|x|` in the plane and
/// `|x|^{2-n} / ((2-n) s_n)` above.
pub fn fs_laplace(x: &[f64]) -> Result<f64> {
    let r = check_point(x)?;
    let n = x.len();
    let s_n = unit_sphere_area(n);
    Ok(if n == 2 {
        r.ln() / s_n
    } else {
        r.powi(2 - n as i32) / ((2.0 - n as f64) * s_n)
    })
}

/// `grad S_n(x) = x / (s_n |x|^n)`
pub fn fs_laplace_grad(x: &[f64]) -> Result<Vec<f64>> {
    let r = check_point(x)?;
    let n = x.len();
    let scale = 1.0 / (unit_sphere_area(n) * r.powi(n as i32));
    Ok(x.iter().map(|v| v * scale).collect())
}

fn check_env(x: &[f64], env: &LameEnv) -> Result<()> {
    if x.len() != env.dim() {
        return Err(Error::UnsupportedDimension(x.len()));
    }
    Ok(())
}

/// Kelvin matrix `Gamma_{n,omega}(x)`.
pub fn kelvin(x: &[f64], env: &LameEnv) -> Result<DMatrix<f64>> {
    check_env(x, env)?;
    let s = fs_laplace(x)?;
    let n = x.len();
    let r = check_point(x)?;
    let c = env.coupling_coef() / (env.s_n() * r.powi(n as i32));
    let a = env.diag_coef();
    Ok(DMatrix::from_fn(n, n, |i, j| {
        let d = if i == j { a * s } else { 0.0 };
        d - c * x[i] * x[j]
    }))
}

/// Gradient of the Kelvin matrix; entry `k` holds `d_k Gamma`.
pub fn kelvin_grad(x: &[f64], env: &LameEnv) -> Result<Vec<DMatrix<f64>>> {
    check_env(x, env)?;
    let r = check_point(x)?;
    let n = x.len();
    let ds = fs_laplace_grad(x)?;
    let a = env.diag_coef();
    let rn = r.powi(n as i32);
    let c = env.coupling_coef() / env.s_n();
    let delta = |i: usize, j: usize| if i == j { 1.0 } else { 0.0 };
    Ok((0..n)
        .map(|k| {
            DMatrix::from_fn(n, n, |i, j| {
                let quot = (delta(i, k) * x[j] + delta(j, k) * x[i]) / rn
                    - n as f64 * x[i] * x[j] * x[k] / (rn * r * r);
                a * delta(i, j) * ds[k] - c * quot
            })
        })
        .collect())
}

/// `T(omega, A) = (omega - 1) tr(A) I + A + A^t`
pub fn traction_map(omega: f64, a: &DMatrix<f64>) -> DMatrix<f64> {
    let mut t = a + a.transpose();
    let shift = (omega - 1.0) * a.trace();
    for i in 0..a.nrows() {
        t[(i, i)] += shift;
    }
    t
}

pub fn traction_map2(omega: f64, a: &Matrix2<f64>) -> Matrix2<f64> {
    a + a.transpose() + Matrix2::identity() * ((omega - 1.0) * a.trace())
}

/// Free-space traction kernel: column `l` is `T(omega, D Gamma^l(x)) nu`,
/// where `Gamma^l` is the `l`-th column of the Kelvin matrix.
pub fn traction_kernel(x: &[f64], nu: &[f64], env: &LameEnv) -> Result<DMatrix<f64>> {
    let grad = kelvin_grad(x, env)?;
    let n = x.len();
    let nu = DVector::from_column_slice(nu);
    let mut out = DMatrix::zeros(n, n);
    for l in 0..n {
        // (D Gamma^l)_{ij} = d_j Gamma_il
        let jac = DMatrix::from_fn(n, n, |i, j| grad[j][(i, l)]);
        out.set_column(l, &(traction_map(env.omega(), &jac) * &nu));
    }
    Ok(out)
}

/// Planar Kelvin matrix without allocation. `x` must be non-zero.
#[inline]
pub fn kelvin2(x: &Vector2<f64>, env: &LameEnv) -> Matrix2<f64> {
    let r2 = x.norm_squared();
    let a = env.diag_coef() * r2.ln() / (4.0 * PI);
    let c = env.coupling_coef() / (2.0 * PI * r2);
    Matrix2::new(
        a - c * x[0] * x[0],
        -c * x[0] * x[1],
        -c * x[0] * x[1],
        a - c * x[1] * x[1],
    )
}

/// Planar Kelvin gradient. `x` must be non-zero.
#[inline]
pub fn kelvin_grad2(x: &Vector2<f64>, env: &LameEnv) -> Grad2 {
    let r2 = x.norm_squared();
    let a = env.diag_coef() / (2.0 * PI * r2);
    let c = env.coupling_coef() / (2.0 * PI * r2);
    let mut g = [Matrix2::zeros(); 2];
    for (k, gk) in g.iter_mut().enumerate() {
        for i in 0..2 {
            for j in 0..2 {
                let mut quot = -2.0 * x[i] * x[j] * x[k] / r2;
                if i == k {
                    quot += x[j];
                }
                if j == k {
                    quot += x[i];
                }
                gk[(i, j)] = -c * quot;
            }
            gk[(i, i)] += a * x[k];
        }
    }
    g
}

/// Closed form of the planar traction kernel,
/// `K_il = c_a [(x.nu) d_il + x_i nu_l - x_l nu_i] / r^2 + c_b x_i x_l (x.nu) / r^4`
/// with `c_a = 1 / (2 pi (omega + 1))` and `c_b = omega / (pi (omega + 1))`.
/// `nu` need not be normalized.
#[inline]
pub fn traction_kernel2(x: &Vector2<f64>, nu: &Vector2<f64>, env: &LameEnv) -> Matrix2<f64> {
    let (ca, cb) = traction_constants(env);
    let r2 = x.norm_squared();
    let xn = x.dot(nu);
    let cross = x[0] * nu[1] - x[1] * nu[0];
    let s = cb * xn / (r2 * r2);
    let d = ca * xn / r2;
    let e = ca * cross / r2;
    Matrix2::new(
        d + s * x[0] * x[0],
        e + s * x[0] * x[1],
        -e + s * x[0] * x[1],
        d + s * x[1] * x[1],
    )
}

/// Traction kernel from a kernel gradient: column `l` is `T(omega, D G^l) nu`
/// with `(D G^l)_{ab} = d_b G_al`.
#[inline]
pub fn traction_from_grad(grad: &Grad2, nu: &Vector2<f64>, omega: f64) -> Matrix2<f64> {
    let mut out = Matrix2::zeros();
    for l in 0..2 {
        let jac = Matrix2::new(
            grad[0][(0, l)],
            grad[1][(0, l)],
            grad[0][(1, l)],
            grad[1][(1, l)],
        );
        out.set_column(l, &(traction_map2(omega, &jac) * nu));
    }
    out
}

/// `(c_a, c_b)` of [`traction_kernel2`].
pub(crate) fn traction_constants(env: &LameEnv) -> (f64, f64) {
    let w = env.omega();
    (1.0 / (2.0 * PI * (w + 1.0)), w / (PI * (w + 1.0)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::E;

    fn env(w: f64) -> LameEnv {
        LameEnv::planar(w).unwrap()
    }

    #[test]
    fn laplace_values() {
        assert_eq!(fs_laplace(&[1.0, 0.0]).unwrap(), 0.0);
        assert!((fs_laplace(&[E, 0.0]).unwrap() - 1.0 / (2.0 * PI)).abs() < 1e-16);
        assert!((fs_laplace(&[0.0, 1.0, 0.0]).unwrap() + 1.0 / (4.0 * PI)).abs() < 1e-16);
        assert!(matches!(fs_laplace(&[0.0, 0.0]), Err(Error::SingularArgument)));
    }

    #[test]
    fn kelvin_unit_point() {
        let g = kelvin(&[1.0, 0.0], &env(1.0)).unwrap();
        assert!((g[(0, 0)] + 1.0 / (8.0 * PI)).abs() < 1e-16);
        assert_eq!(g[(0, 1)], 0.0);
        assert_eq!(g[(1, 0)], 0.0);
        assert_eq!(g[(1, 1)], 0.0);
        let fast = kelvin2(&Vector2::new(0.3, -0.8), &env(2.5));
        let slow = kelvin(&[0.3, -0.8], &env(2.5)).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert!((fast[(i, j)] - slow[(i, j)]).abs() < 1e-16);
            }
        }
    }

    #[test]
    fn kelvin_decouples_at_zero_omega() {
        let x = [0.4, -1.3];
        let g = kelvin(&x, &env(1e-300)).unwrap();
        let s = fs_laplace(&x).unwrap();
        assert!((g[(0, 0)] - s).abs() < 1e-16 && (g[(1, 1)] - s).abs() < 1e-16);
        assert!(g[(0, 1)].abs() < 1e-300);
    }

    #[test]
    fn three_dimensional_gradient_by_differences() {
        let e3 = LameEnv::new(3, 0.7).unwrap();
        let x = [0.3, -0.2, 0.5];
        let g = kelvin_grad(&x, &e3).unwrap();
        let h = 1e-5;
        for k in 0..3 {
            let mut xp = x;
            let mut xm = x;
            xp[k] += h;
            xm[k] -= h;
            let fd = (kelvin(&xp, &e3).unwrap() - kelvin(&xm, &e3).unwrap()) / (2.0 * h);
            assert!((fd - &g[k]).amax() < 1e-8);
        }
    }

    #[test]
    fn traction_map_examples() {
        let z = DMatrix::<f64>::zeros(2, 2);
        assert_eq!(traction_map(1.7, &z), z);
        let t = traction_map(1.7, &DMatrix::identity(2, 2));
        assert!((t - DMatrix::identity(2, 2) * 3.4).amax() < 1e-15);
        let skew = DMatrix::from_row_slice(2, 2, &[0.0, 2.0, -2.0, 0.0]);
        assert_eq!(traction_map(0.3, &skew).amax(), 0.0);
    }

    #[test]
    fn closed_form_traction_matches_composition() {
        for &w in &[0.5, 1.0, 4.0] {
            let e = env(w);
            for &(x, nu) in &[
                ([1.0, 0.0], [1.0, 0.0]),
                ([0.3, 0.4], [0.6, -0.8]),
                ([-0.7, 0.05], [0.2, 0.9]),
            ] {
                let slow = traction_kernel(&x, &nu, &e).unwrap();
                let fast = traction_kernel2(&Vector2::from(x), &Vector2::from(nu), &e);
                let via_grad = traction_from_grad(
                    &kelvin_grad2(&Vector2::from(x), &e),
                    &Vector2::from(nu),
                    w,
                );
                assert!((via_grad - fast).amax() < 1e-14);
                for i in 0..2 {
                    for j in 0..2 {
                        assert!((slow[(i, j)] - fast[(i, j)]).abs() < 1e-14);
                    }
                }
            }
        }
    }
}

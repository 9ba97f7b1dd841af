//! Fundamental solutions of the Lamé operator `L[omega] = Delta + omega grad div`.

mod free;
mod lattice;

pub use free::{
    fs_laplace, fs_laplace_grad, kelvin, kelvin2, kelvin_grad, kelvin_grad2, traction_kernel,
    traction_from_grad, traction_kernel2, traction_map, traction_map2, Grad2,
};
pub(crate) use free::traction_constants;
pub use lattice::{lame_fd, plan_lattice_sum, LatticeSumPlan, PeriodicLame, MAX_FOURIER_CUTOFF, MAX_REAL_CUTOFF};

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Dimension and Lamé ratio. The second Lamé constant is normalized to 1, so
/// `omega - 1` is the ratio of the first to the second constant.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LameEnv {
    n: usize,
    omega: f64,
}

impl LameEnv {
    pub fn new(n: usize, omega: f64) -> Result<Self> {
        if n != 2 && n != 3 {
            return Err(Error::UnsupportedDimension(n));
        }
        let bound = Self::omega_bound(n);
        if !(omega > bound && omega.is_finite()) {
            return Err(Error::InadmissibleOmega {
                dim: n,
                omega,
                bound,
            });
        }
        Ok(Self { n, omega })
    }

    /// Planar environment, the only one the boundary solver discretizes.
    pub fn planar(omega: f64) -> Result<Self> {
        Self::new(2, omega)
    }

    /// `1 - 2/n`
    pub fn omega_bound(n: usize) -> f64 {
        1.0 - 2.0 / n as f64
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    /// `(omega + 2) / (2 (omega + 1))`, the weight of `S_n I`.
    pub fn diag_coef(&self) -> f64 {
        (self.omega + 2.0) / (2.0 * (self.omega + 1.0))
    }

    /// `omega / (2 (omega + 1))`, the weight of `x x^t / (s_n |x|^n)`.
    pub fn coupling_coef(&self) -> f64 {
        self.omega / (2.0 * (self.omega + 1.0))
    }

    /// `omega / (omega + 1)`, the weight of the Hessian of the biharmonic part.
    pub fn beta(&self) -> f64 {
        self.omega / (self.omega + 1.0)
    }

    /// Surface measure of the unit sphere.
    pub fn s_n(&self) -> f64 {
        unit_sphere_area(self.n)
    }
}

pub(crate) fn unit_sphere_area(n: usize) -> f64 {
    match n {
        2 => 2.0 * PI,
        3 => 4.0 * PI,
        _ => unreachable!("dimension checked on construction"),
    }
}

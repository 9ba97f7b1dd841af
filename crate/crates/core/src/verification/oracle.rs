//! Brute-force reference values for the periodic kernels.
//!
//! The Fourier series of the periodic fundamental solution,
//! `sum_{z != 0} (1/|Q|) [-I/|k|^2 + beta k k^t / |k|^4] e^{i k.x}` with
//! `k = 2 pi q^{-1} z`, is only distributionally convergent. Damping every
//! term by `exp(-sigma |k|^2)` amounts to applying the heat semigroup, and away
//! from the lattice the damped sum equals `Gamma^q + sigma Delta Gamma^q` up to
//! terms of order `exp(-d^2 / (4 sigma))` (`Delta^2 Gamma^q` vanishes there).
//! Evaluating three filter levels and extrapolating to `sigma = 0` removes the
//! polynomial part; the spread between two- and three-level extrapolants is
//! reported as a certificate.

use std::f64::consts::TAU;

use nalgebra::{Matrix2, Vector2};

use crate::error::{Error, Result};
use crate::geometry::PeriodicityCell;
use crate::kernels::LameEnv;

/// Damping exponent beyond which terms are dropped (`e^{-42}` ~ 6e-19).
const DAMPING_CUTOFF: f64 = 42.0;
/// `sigma_0 = d^2 / (4 * SIGMA_RATIO)`: the neglected heat-kernel mass from
/// the nearest singularity is then about `exp(-SIGMA_RATIO)`.
const SIGMA_RATIO: f64 = 45.0;

/// Extrapolated oracle value with its consistency certificate.
#[derive(Clone, Copy, Debug)]
pub struct OracleValue<T> {
    pub value: T,
    /// Entrywise spread between the two- and three-level extrapolants.
    pub certificate: f64,
}

/// Default filter levels `sigma_0, sigma_0/2, sigma_0/4` for the point `x`.
pub fn default_sigma_levels(x: &Vector2<f64>, cell: &PeriodicityCell) -> Result<[f64; 3]> {
    let d = cell.nearest_image(x).norm();
    if d == 0.0 {
        return Err(Error::SingularArgument);
    }
    let s0 = d * d / (4.0 * SIGMA_RATIO);
    Ok([s0, 0.5 * s0, 0.25 * s0])
}

/// Damped sums at three levels `sigma, sigma/2, sigma/4`, returned in that order.
fn damped_sums(
    x: &Vector2<f64>,
    cell: &PeriodicityCell,
    sigma: f64,
    mut coef: impl FnMut(&Vector2<f64>, f64) -> Matrix2<f64>,
) -> [Matrix2<f64>; 3] {
    let smallest = 0.25 * sigma;
    let kmax: Vec<i64> = (0..2)
        .map(|l| (cell.edge(l) * (DAMPING_CUTOFF / (TAU * TAU * smallest)).sqrt()).ceil() as i64)
        .collect();
    let phase = |l: usize, m: i64| (TAU * m as f64 * x[l] / cell.edge(l)).sin_cos();
    let p1: Vec<(f64, f64)> = (0..=kmax[0]).map(|m| phase(0, m)).collect();
    let p2: Vec<(f64, f64)> = (0..=kmax[1]).map(|m| phase(1, m)).collect();
    let mut acc = [Matrix2::zeros(); 3];
    for z1 in 0..=kmax[0] {
        for z2 in -kmax[1]..=kmax[1] {
            if z1 == 0 && z2 <= 0 {
                continue;
            }
            let k = Vector2::new(TAU * z1 as f64 / cell.edge(0), TAU * z2 as f64 / cell.edge(1));
            let k2 = k.norm_squared();
            if smallest * k2 > DAMPING_CUTOFF {
                continue;
            }
            let (s1, c1) = p1[z1 as usize];
            let (s2a, c2) = p2[z2.unsigned_abs() as usize];
            let s2 = if z2 < 0 { -s2a } else { s2a };
            let cos = c1 * c2 - s1 * s2;
            // the half-space sum counts each +/-k pair once
            let term = coef(&k, k2) * (2.0 * cos);
            let e4 = (-smallest * k2).exp();
            let e2 = e4 * e4;
            let e1 = e2 * e2;
            acc[0] += term * e1;
            acc[1] += term * e2;
            acc[2] += term * e4;
        }
    }
    acc
}

fn extrapolate(levels: &[Matrix2<f64>; 3]) -> (Matrix2<f64>, f64) {
    let [f1, f2, f4] = levels;
    let three = (f4 * 8.0 - f2 * 6.0 + f1) / 3.0;
    let two = f4 * 2.0 - f2;
    (three, (three - two).amax())
}

fn check_levels(levels: &[f64]) -> Result<f64> {
    match levels {
        [s0, s1, s2] if *s0 > 0.0 && (*s1 - 0.5 * s0).abs() <= 1e-12 * s0 && (*s2 - 0.25 * s0).abs() <= 1e-12 * s0 => {
            Ok(*s0)
        }
        _ => Err(Error::Oracle(format!(
            "filter levels must be sigma, sigma/2, sigma/4; got {levels:?}"
        ))),
    }
}

/// Filtered-Fourier reference value of `Gamma^q(x)`.
///
/// Fails when the certificate exceeds `10 * target`.
pub fn oracle_filtered_fourier(
    x: &Vector2<f64>,
    env: &LameEnv,
    cell: &PeriodicityCell,
    sigma_levels: &[f64],
    target: f64,
) -> Result<OracleValue<Matrix2<f64>>> {
    if cell.nearest_image(x).norm() == 0.0 {
        return Err(Error::SingularArgument);
    }
    let sigma = check_levels(sigma_levels)?;
    let beta = env.beta();
    let vol = cell.volume();
    let sums = damped_sums(x, cell, sigma, |k, k2| {
        (k * k.transpose()) * (beta / (vol * k2 * k2)) - Matrix2::identity() / (vol * k2)
    });
    let (value, certificate) = extrapolate(&sums);
    if !(certificate <= 10.0 * target) {
        return Err(Error::Oracle(format!(
            "filter levels disagree by {certificate:e} (target {target:e})"
        )));
    }
    Ok(OracleValue { value, certificate })
}

/// Filtered-Fourier reference value of the zero-mean periodic harmonic
/// function `S^q(x)` (coefficients `-1 / (|Q| |k|^2)`).
pub fn oracle_harmonic(
    x: &Vector2<f64>,
    cell: &PeriodicityCell,
    sigma_levels: &[f64],
    target: f64,
) -> Result<OracleValue<f64>> {
    if cell.nearest_image(x).norm() == 0.0 {
        return Err(Error::SingularArgument);
    }
    let sigma = check_levels(sigma_levels)?;
    let vol = cell.volume();
    let sums = damped_sums(x, cell, sigma, |_, k2| Matrix2::identity() * (-1.0 / (vol * k2)));
    let (value, certificate) = extrapolate(&sums);
    if !(certificate <= 10.0 * target) {
        return Err(Error::Oracle(format!(
            "filter levels disagree by {certificate:e} (target {target:e})"
        )));
    }
    Ok(OracleValue {
        value: value[(0, 0)],
        certificate,
    })
}

/// Oracle evaluation with the default levels for `x`.
pub fn oracle_green(
    x: &Vector2<f64>,
    env: &LameEnv,
    cell: &PeriodicityCell,
    target: f64,
) -> Result<OracleValue<Matrix2<f64>>> {
    let levels = default_sigma_levels(x, cell)?;
    oracle_filtered_fourier(x, env, cell, &levels, target)
}

//! Periodic quadrature on `N` equispaced nodes `t_j = t_0 + 2 pi j / N`.
//!
//! All weights are functions of the offset `theta = s - t_j` between the
//! target parameter `s` and the node, so the same routines serve collocation
//! at nodes (`theta = 2 pi k / N`) and evaluation at arbitrary parameters.

use std::f64::consts::{PI, TAU};

/// Weight of node `j` in the rule
/// `\int_0^{2pi} ln(4 sin^2((s - t)/2)) f(t) dt ~ sum_j R(s - t_j) f(t_j)`,
/// exact for trigonometric polynomials of degree below `N/2`.
pub fn log_weight(n: usize, theta: f64) -> f64 {
    let m = n / 2;
    let mf = m as f64;
    let mut sum = 0.0;
    for k in 1..m {
        sum += (k as f64 * theta).cos() / k as f64;
    }
    -TAU / mf * sum - PI / (mf * mf) * (mf * theta).cos()
}

/// Weights of the log rule at the nodes, indexed by `(i - j) mod N`.
pub fn log_weights(n: usize) -> Vec<f64> {
    (0..n).map(|k| log_weight(n, TAU * k as f64 / n as f64)).collect()
}

/// Weight of node `j` in the rule for the conjugate-function operator
/// `H f(s) = (1/2pi) PV \int_0^{2pi} cot((s - t)/2) f(t) dt ~ sum_j w(s - t_j) f(t_j)`.
///
/// This is `H` applied to the trigonometric interpolant, so `H cos = sin` and
/// `H sin = -cos` hold exactly below the Nyquist mode.
pub fn hilbert_weight(n: usize, theta: f64) -> f64 {
    let m = n / 2;
    let mut sum = 0.0;
    for k in 1..m {
        sum += 2.0 * (k as f64 * theta).sin();
    }
    sum += (m as f64 * theta).sin();
    sum / n as f64
}

/// Conjugate-function weights at the nodes, indexed by `(i - j) mod N`:
/// `(1/N) (1 - (-1)^k) cot(pi k / N)`, zero for even `k`.
pub fn hilbert_weights(n: usize) -> Vec<f64> {
    (0..n)
        .map(|k| {
            if k % 2 == 0 {
                0.0
            } else {
                2.0 / n as f64 / (PI * k as f64 / n as f64).tan()
            }
        })
        .collect()
}

/// Cardinal function of trigonometric interpolation on `N` nodes (the
/// Nyquist mode split symmetrically); equals 1 at `theta = 0` and vanishes at
/// the other nodes.
pub fn interpolation_weight(n: usize, theta: f64) -> f64 {
    let m = n / 2;
    let mut sum = 1.0;
    for k in 1..m {
        sum += 2.0 * (k as f64 * theta).cos();
    }
    sum += (m as f64 * theta).cos();
    sum / n as f64
}

/// Trigonometric interpolant of `N` equispaced samples, stored by its
/// Fourier coefficients so evaluation costs `O(N)`.
#[derive(Clone, Debug)]
pub struct TrigInterpolant {
    t0: f64,
    a0: f64,
    cos: Vec<f64>,
    sin: Vec<f64>,
    /// Coefficient of `cos(N/2 (t - t0))`, split symmetrically.
    nyquist: f64,
}

impl TrigInterpolant {
    /// Samples `f_j` taken at `t0 + 2 pi j / N`, `N` even.
    pub fn new(samples: &[f64], t0: f64) -> Self {
        let n = samples.len();
        let m = n / 2;
        let table: Vec<(f64, f64)> = (0..n).map(|k| (TAU * k as f64 / n as f64).sin_cos()).collect();
        let scale = 2.0 / n as f64;
        let mut cos = vec![0.0; m.saturating_sub(1)];
        let mut sin = vec![0.0; m.saturating_sub(1)];
        for k in 1..m {
            let (mut a, mut b) = (0.0, 0.0);
            for (j, f) in samples.iter().enumerate() {
                let (s, c) = table[(k * j) % n];
                a += f * c;
                b += f * s;
            }
            cos[k - 1] = a * scale;
            sin[k - 1] = b * scale;
        }
        let a0 = samples.iter().sum::<f64>() / n as f64;
        let nyquist = samples
            .iter()
            .enumerate()
            .map(|(j, f)| if j % 2 == 0 { *f } else { -*f })
            .sum::<f64>()
            / n as f64;
        Self {
            t0,
            a0,
            cos,
            sin,
            nyquist,
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        let tau = t - self.t0;
        let mut acc = self.a0;
        for (k, (a, b)) in self.cos.iter().zip(&self.sin).enumerate() {
            let (s, c) = ((k + 1) as f64 * tau).sin_cos();
            acc += a * c + b * s;
        }
        acc + self.nyquist * ((self.cos.len() + 1) as f64 * tau).cos()
    }
}

/// `ln(4 sin^2(theta/2))`
pub fn log_sin2(theta: f64) -> f64 {
    let s = (0.5 * theta).sin();
    (4.0 * s * s).ln()
}

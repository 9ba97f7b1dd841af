//! Ewald summation of the periodic Lamé fundamental solution in the plane.
//!
//! The periodic kernel is split as `Gamma^q = S^q I - beta Hess(H^q)` with the
//! zero-mean periodic harmonic and biharmonic functions `S^q`, `H^q`. Both are
//! screened with the Gaussian `exp(-alpha^2 r^2)`; the real-space images then
//! involve `E1(alpha^2 r^2)` and `exp(-alpha^2 r^2)`, and the reciprocal terms
//! carry `exp(-|k|^2 / (4 alpha^2))`.

use std::f64::consts::{PI, TAU};

use nalgebra::{Matrix2, Vector2};

use super::free::{kelvin2, kelvin_grad2, Grad2};
use super::LameEnv;
use crate::error::{Error, Result};
use crate::geometry::PeriodicityCell;
use crate::special::{ein, exp_integral_e1, phi1, phi2, EULER_GAMMA};

/// Hard ceiling on the real-space image radius `max |z|_inf`.
pub const MAX_REAL_CUTOFF: usize = 12;
/// Hard ceiling on the reciprocal radius `max |z|_inf`.
pub const MAX_FOURIER_CUTOFF: usize = 60;
/// Smallest tolerance the planner accepts; below it rounding dominates.
const MIN_TOL: f64 = 1e-14;
const MAX_TOL: f64 = 1e-4;
/// Images with `alpha^2 r^2` beyond this contribute below 1e-18 and are skipped.
const U_SKIP: f64 = 40.0;

/// Truncation parameters of the two Ewald sums.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LatticeSumPlan {
    /// Screening parameter `alpha`.
    pub eta: f64,
    /// Real-space images `z` with `|z|_inf <= real_cutoff`.
    pub real_cutoff: usize,
    /// Reciprocal vectors `2 pi q^{-1} z` with `0 < |z|_inf <= fourier_cutoff`.
    pub fourier_cutoff: usize,
    pub tol: f64,
    /// A-priori bound on the omitted images (values and gradients, per entry).
    pub real_tail_bound: f64,
    /// A-priori bound on the omitted reciprocal terms.
    pub fourier_tail_bound: f64,
}

impl LatticeSumPlan {
    /// Rough work estimate per kernel evaluation; images cost an `E1` each.
    pub fn cost(&self) -> usize {
        let images = (2 * self.real_cutoff + 1).pow(2);
        let kterms = ((2 * self.fourier_cutoff + 1).pow(2) - 1) / 2;
        4 * images + kterms
    }

    /// Sum of both tail bounds.
    pub fn achieved(&self) -> f64 {
        self.real_tail_bound + self.fourier_tail_bound
    }
}

/// Bound on one omitted image at distance `r`, covering values and gradients.
fn image_bound(alpha: f64, r: f64) -> f64 {
    let u = alpha * alpha * r * r;
    let e = (-u).exp();
    e * (1.0 / u + 1.0) / (4.0 * PI) + e * (3.0 + u) / (2.0 * PI * r)
}

/// Tail of the image sum for arguments with `|x_l| <= q_ll`: every image in
/// the shell `|z|_inf = m` then lies at distance at least `(m - 1) q_min`.
fn real_tail(alpha: f64, cutoff: usize, cell: &PeriodicityCell) -> f64 {
    let qmin = cell.min_edge();
    let mut total = 0.0;
    for m in (cutoff + 1).. {
        let term = 8.0 * m as f64 * image_bound(alpha, (m - 1) as f64 * qmin);
        total += term;
        if term < 1e-30 * total.max(1e-300) || term == 0.0 || m > cutoff + 4000 {
            break;
        }
    }
    total
}

/// Tail of the reciprocal sum: the shell `|z|_inf = m` has `8m` vectors of
/// length at least `2 pi m / q_max`.
fn fourier_tail(alpha: f64, cutoff: usize, cell: &PeriodicityCell) -> f64 {
    let qmax = cell.max_edge();
    let mut total = 0.0;
    for m in (cutoff + 1).. {
        let k = TAU * m as f64 / qmax;
        let s = k * k / (4.0 * alpha * alpha);
        let term = 8.0 * m as f64 * (-s).exp() * (2.0 + s) * (1.0 + k) / (k * k * cell.volume());
        total += term;
        if term < 1e-30 * total.max(1e-300) || term == 0.0 || m > cutoff + 4000 {
            break;
        }
    }
    total
}

/// Chooses the screening parameter and both cutoffs so that the a-priori
/// tail bounds sum to at most `tol`, minimizing [`LatticeSumPlan::cost`].
pub fn plan_lattice_sum(cell: &PeriodicityCell, env: &LameEnv, tol: f64) -> Result<LatticeSumPlan> {
    if env.dim() != 2 {
        return Err(Error::UnsupportedDimension(env.dim()));
    }
    if !(tol > 0.0) || tol < MIN_TOL {
        return Err(Error::ToleranceUnattainable { tol });
    }
    if tol > MAX_TOL || !tol.is_finite() {
        return Err(Error::InvalidTolerance { tol });
    }
    let default_eta = PI.sqrt() / cell.min_edge();
    let mut best: Option<LatticeSumPlan> = None;
    for step in -10..=10 {
        let eta = default_eta * 1.1f64.powi(step);
        let real = (1..=MAX_REAL_CUTOFF)
            .map(|c| (c, real_tail(eta, c, cell)))
            .find(|&(_, b)| b <= 0.5 * tol);
        let fourier = (1..=MAX_FOURIER_CUTOFF)
            .map(|c| (c, fourier_tail(eta, c, cell)))
            .find(|&(_, b)| b <= 0.5 * tol);
        let (Some((real_cutoff, real_tail_bound)), Some((fourier_cutoff, fourier_tail_bound))) =
            (real, fourier)
        else {
            continue;
        };
        let plan = LatticeSumPlan {
            eta,
            real_cutoff,
            fourier_cutoff,
            tol,
            real_tail_bound,
            fourier_tail_bound,
        };
        if best.is_none_or(|b| plan.cost() < b.cost()) {
            best = Some(plan);
        }
    }
    best.ok_or(Error::ToleranceUnattainable { tol })
}

#[derive(Clone, Debug)]
struct KTerm {
    z: [i64; 2],
    k: Vector2<f64>,
    /// `(2/|Q|) e^{-s} / |k|^2 [-I + beta (1 + s) k k^t / |k|^2]`
    green: Matrix2<f64>,
    /// `-(2/|Q|) e^{-s} / |k|^2`
    harmonic: f64,
}

/// Which part of the lattice sum to evaluate.
#[derive(Clone, Copy, PartialEq)]
enum Part {
    /// `Gamma^q` itself.
    Full,
    /// `Gamma^q - Gamma`, with the origin image replaced by its smooth remainder.
    Regular,
}

/// Evaluator for the periodic fundamental solution of one (cell, omega, plan).
#[derive(Clone, Debug)]
pub struct PeriodicLame {
    env: LameEnv,
    cell: PeriodicityCell,
    plan: LatticeSumPlan,
    alpha: f64,
    images: Vec<Vector2<f64>>,
    kterms: Vec<KTerm>,
    constant: f64,
}

impl PeriodicLame {
    pub fn new(env: LameEnv, cell: PeriodicityCell, plan: LatticeSumPlan) -> Result<Self> {
        if env.dim() != 2 {
            return Err(Error::UnsupportedDimension(env.dim()));
        }
        let alpha = plan.eta;
        let rc = plan.real_cutoff as i64;
        let mut images = Vec::new();
        for z1 in -rc..=rc {
            for z2 in -rc..=rc {
                if (z1, z2) != (0, 0) {
                    images.push(cell.lattice_point([z1, z2]));
                }
            }
        }
        let kc = plan.fourier_cutoff as i64;
        let beta = env.beta();
        let vol = cell.volume();
        let mut kterms = Vec::new();
        for z1 in 0..=kc {
            for z2 in -kc..=kc {
                if z1 == 0 && z2 <= 0 {
                    continue;
                }
                let k = Vector2::new(TAU * z1 as f64 / cell.edge(0), TAU * z2 as f64 / cell.edge(1));
                let k2 = k.norm_squared();
                let s = k2 / (4.0 * alpha * alpha);
                let w = 2.0 * (-s).exp() / (vol * k2);
                let green = (k * k.transpose()) * (w * beta * (1.0 + s) / k2) - Matrix2::identity() * w;
                kterms.push(KTerm {
                    z: [z1, z2],
                    k,
                    green,
                    harmonic: -w,
                });
            }
        }
        Ok(Self {
            env,
            cell,
            plan,
            alpha,
            images,
            kterms,
            constant: 1.0 / (4.0 * alpha * alpha * vol),
        })
    }

    /// Plans for `tol` and builds the evaluator.
    pub fn with_tol(env: LameEnv, cell: PeriodicityCell, tol: f64) -> Result<Self> {
        let plan = plan_lattice_sum(&cell, &env, tol)?;
        Self::new(env, cell, plan)
    }

    pub fn env(&self) -> &LameEnv {
        &self.env
    }

    pub fn cell(&self) -> &PeriodicityCell {
        &self.cell
    }

    pub fn plan(&self) -> &LatticeSumPlan {
        &self.plan
    }

    fn reduce(&self, x: &Vector2<f64>) -> Result<Vector2<f64>> {
        let y = self.cell.nearest_image(x);
        if y[0] == 0.0 && y[1] == 0.0 {
            return Err(Error::SingularArgument);
        }
        Ok(y)
    }

    /// `Gamma^q(x)`; fails on lattice points.
    pub fn green(&self, x: &Vector2<f64>) -> Result<Matrix2<f64>> {
        let y = self.reduce(x)?;
        Ok(self.sum(&y, Part::Full, false).0)
    }

    /// `d_k Gamma^q(x)`; fails on lattice points.
    pub fn green_grad(&self, x: &Vector2<f64>) -> Result<Grad2> {
        let y = self.reduce(x)?;
        Ok(self.sum(&y, Part::Full, true).1)
    }

    pub fn green_with_grad(&self, x: &Vector2<f64>) -> Result<(Matrix2<f64>, Grad2)> {
        let y = self.reduce(x)?;
        Ok(self.sum(&y, Part::Full, true))
    }

    fn within_neighbourhood(&self, x: &Vector2<f64>) -> bool {
        x[0].abs() <= self.cell.edge(0) && x[1].abs() <= self.cell.edge(1)
    }

    /// `R^q(x) = Gamma^q(x) - Gamma(x)`, analytic near the origin.
    pub fn regular_part(&self, x: &Vector2<f64>) -> Result<Matrix2<f64>> {
        if self.within_neighbourhood(x) {
            return Ok(self.sum(x, Part::Regular, false).0);
        }
        if x.norm_squared() == 0.0 {
            unreachable!("origin lies within the neighbourhood");
        }
        Ok(self.green(x)? - kelvin2(x, &self.env))
    }

    /// Gradient of [`Self::regular_part`].
    pub fn regular_part_grad(&self, x: &Vector2<f64>) -> Result<Grad2> {
        if self.within_neighbourhood(x) {
            return Ok(self.sum(x, Part::Regular, true).1);
        }
        let g = self.green_grad(x)?;
        let f = kelvin_grad2(x, &self.env);
        Ok([g[0] - f[0], g[1] - f[1]])
    }

    /// Regular part together with its gradient.
    pub fn regular_part_with_grad(&self, x: &Vector2<f64>) -> Result<(Matrix2<f64>, Grad2)> {
        if self.within_neighbourhood(x) {
            return Ok(self.sum(x, Part::Regular, true));
        }
        let (v, g) = self.green_with_grad(x)?;
        let f = kelvin_grad2(x, &self.env);
        Ok((v - kelvin2(x, &self.env), [g[0] - f[0], g[1] - f[1]]))
    }

    /// Zero-mean periodic harmonic function `S^q` with `Delta S^q = sum delta - 1/|Q|`.
    pub fn harmonic(&self, x: &Vector2<f64>) -> Result<f64> {
        let y = self.reduce(x)?;
        Ok(self.harmonic_sum(&y, Part::Full))
    }

    /// `S^q(x) - (1/2pi) ln|x|`, analytic near the origin.
    pub fn harmonic_regular(&self, x: &Vector2<f64>) -> Result<f64> {
        if self.within_neighbourhood(x) {
            return Ok(self.harmonic_sum(x, Part::Regular));
        }
        Ok(self.harmonic(x)? - x.norm().ln() / TAU)
    }

    /// Fourth-order finite-difference approximation of `L[omega]` applied
    /// to the `j`-th column of `Gamma^q` at `x`, with stencil step `h`.
    pub fn lame_operator_fd(&self, x: &Vector2<f64>, j: usize, h: f64) -> Result<Vector2<f64>> {
        lame_fd(|y| Ok(self.green(y)?.column(j).into_owned()), x, h, self.env.omega())
    }

    /// `|L[omega] Gamma^{q,j}(x) + e_j / |Q||` by fourth-order differences.
    pub fn pde_residual(&self, x: &Vector2<f64>, j: usize, h: f64) -> Result<f64> {
        let mut v = self.lame_operator_fd(x, j, h)?;
        v[j] += 1.0 / self.cell.volume();
        Ok(v.norm())
    }

    /// Trigonometric factors `cos/sin(2 pi m x_l / q_ll)` for `m = 0..=K`.
    fn phases(&self, x: &Vector2<f64>) -> [Vec<(f64, f64)>; 2] {
        let kc = self.plan.fourier_cutoff;
        let make = |l: usize| -> Vec<(f64, f64)> {
            let theta = TAU * x[l] / self.cell.edge(l);
            (0..=kc)
                .map(|m| {
                    let (s, c) = (m as f64 * theta).sin_cos();
                    (c, s)
                })
                .collect()
        };
        [make(0), make(1)]
    }

    fn cos_sin(ph: &[Vec<(f64, f64)>; 2], z: [i64; 2]) -> (f64, f64) {
        let (c1, s1) = ph[0][z[0] as usize];
        let (c2, s2a) = ph[1][z[1].unsigned_abs() as usize];
        let s2 = if z[1] < 0 { -s2a } else { s2a };
        (c1 * c2 - s1 * s2, s1 * c2 + c1 * s2)
    }

    fn sum(&self, x: &Vector2<f64>, part: Part, want_grad: bool) -> (Matrix2<f64>, Grad2) {
        let a_coef = self.env.diag_coef();
        let beta = self.env.beta();
        let alpha2 = self.alpha * self.alpha;
        let mut val = Matrix2::identity() * self.constant;
        let mut grad = [Matrix2::zeros(); 2];
        if part == Part::Regular {
            let (v, g) = self.origin_regular(x, want_grad);
            val += v;
            grad = g;
        }

        let mut add_image = |y: Vector2<f64>| {
            let r2 = y.norm_squared();
            let u = alpha2 * r2;
            if u > U_SKIP {
                return;
            }
            let e = (-u).exp();
            let e1 = exp_integral_e1(u);
            let yy = y * y.transpose();
            val += Matrix2::identity() * (-a_coef * e1 / (4.0 * PI)) - yy * (beta * e / (4.0 * PI * r2));
            if want_grad {
                let c_diag = a_coef * e / (TAU * r2);
                let c_cube = beta * e * (1.0 + u) / (TAU * r2 * r2);
                let c_sym = beta * e / (4.0 * PI * r2);
                for (k, gk) in grad.iter_mut().enumerate() {
                    *gk += yy * (c_cube * y[k]);
                    for i in 0..2 {
                        gk[(i, i)] += c_diag * y[k];
                        gk[(i, k)] -= c_sym * y[i];
                        gk[(k, i)] -= c_sym * y[i];
                    }
                }
            }
        };

        if part == Part::Full {
            add_image(*x);
        }
        for img in &self.images {
            add_image(x + img);
        }

        let ph = self.phases(x);
        for t in &self.kterms {
            let (c, s) = Self::cos_sin(&ph, t.z);
            val += t.green * c;
            if want_grad {
                for (k, gk) in grad.iter_mut().enumerate() {
                    *gk -= t.green * (t.k[k] * s);
                }
            }
        }
        (val, grad)
    }

    /// Screened origin image minus the Kelvin matrix, written with entire
    /// functions of `u` so it stays accurate as `x -> 0`.
    fn origin_regular(&self, y: &Vector2<f64>, want_grad: bool) -> (Matrix2<f64>, Grad2) {
        let a_coef = self.env.diag_coef();
        let beta = self.env.beta();
        let alpha2 = self.alpha * self.alpha;
        let u = alpha2 * y.norm_squared();
        let p1 = phi1(u);
        let yy = y * y.transpose();
        let diag = -a_coef / (4.0 * PI) * (ein(u) - EULER_GAMMA - 2.0 * self.alpha.ln());
        let val = Matrix2::identity() * diag + yy * (beta / (4.0 * PI) * alpha2 * p1);
        let mut grad = [Matrix2::zeros(); 2];
        if want_grad {
            let p2 = phi2(u);
            let c_diag = -a_coef / TAU * alpha2 * p1;
            let c_sym = beta / (4.0 * PI) * alpha2 * p1;
            let c_cube = -beta / TAU * alpha2 * alpha2 * p2;
            for (k, gk) in grad.iter_mut().enumerate() {
                *gk += yy * (c_cube * y[k]);
                for i in 0..2 {
                    gk[(i, i)] += c_diag * y[k];
                    gk[(i, k)] += c_sym * y[i];
                    gk[(k, i)] += c_sym * y[i];
                }
            }
        }
        (val, grad)
    }

    fn harmonic_sum(&self, x: &Vector2<f64>, part: Part) -> f64 {
        let alpha2 = self.alpha * self.alpha;
        let mut val = self.constant;
        match part {
            Part::Full => val -= exp_integral_e1(alpha2 * x.norm_squared()) / (4.0 * PI),
            Part::Regular => {
                let u = alpha2 * x.norm_squared();
                val -= (ein(u) - EULER_GAMMA - 2.0 * self.alpha.ln()) / (4.0 * PI);
            }
        }
        for img in &self.images {
            let u = alpha2 * (x + img).norm_squared();
            if u <= U_SKIP {
                val -= exp_integral_e1(u) / (4.0 * PI);
            }
        }
        let ph = self.phases(x);
        for t in &self.kterms {
            val += t.harmonic * Self::cos_sin(&ph, t.z).0;
        }
        val
    }
}

/// Fourth-order finite-difference approximation of `(Delta + omega grad div) f`
/// at `x` with stencil step `h`.
pub fn lame_fd(
    f: impl Fn(&Vector2<f64>) -> Result<Vector2<f64>>,
    x: &Vector2<f64>,
    h: f64,
    omega: f64,
) -> Result<Vector2<f64>> {
    const D1: [f64; 5] = [1.0 / 12.0, -2.0 / 3.0, 0.0, 2.0 / 3.0, -1.0 / 12.0];
    const D2: [f64; 5] = [-1.0 / 12.0, 4.0 / 3.0, -5.0 / 2.0, 4.0 / 3.0, -1.0 / 12.0];
    let at = |dx: f64, dy: f64| f(&(x + Vector2::new(dx, dy)));
    // hess[a][b] = d_a d_b f
    let mut hess = [[Vector2::zeros(); 2]; 2];
    for (a, dir) in [Vector2::new(1.0, 0.0), Vector2::new(0.0, 1.0)].iter().enumerate() {
        let mut acc = Vector2::zeros();
        for (m, w) in D2.iter().enumerate() {
            let t = (m as f64 - 2.0) * h;
            acc += at(dir[0] * t, dir[1] * t)? * *w;
        }
        hess[a][a] = acc / (h * h);
    }
    let mut mixed = Vector2::zeros();
    for (m1, w1) in D1.iter().enumerate().filter(|(_, w)| **w != 0.0) {
        for (m2, w2) in D1.iter().enumerate().filter(|(_, w)| **w != 0.0) {
            mixed += at((m1 as f64 - 2.0) * h, (m2 as f64 - 2.0) * h)? * (w1 * w2);
        }
    }
    hess[0][1] = mixed / (h * h);
    hess[1][0] = hess[0][1];
    let laplace = hess[0][0] + hess[1][1];
    let grad_div = Vector2::new(hess[0][0][0] + hess[0][1][1], hess[1][0][0] + hess[1][1][1]);
    Ok(laplace + grad_div * omega)
}

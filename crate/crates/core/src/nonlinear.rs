//! Nonlinear traction condition `T(omega, Du) nu = G(x, u)` on the hole boundary.
//!
//! With `u = v_q[mu] + c + B q^{-1} x` the problem becomes
//!
//! ```text
//! mu/2 + W* mu = G(x, V mu + c + B q^{-1} x) - T(omega, B q^{-1}) nu,   \int mu dsigma = 0,
//! ```
//!
//! solved here for `(mu, c)` by Newton's method or by a chord iteration that
//! freezes the Jacobian at the initial guess.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector, Matrix2, Vector2};

use crate::error::{Error, Result};
use crate::geometry::BoundaryCurve;
use crate::kernels::{traction_map2, PeriodicLame};
use crate::linalg::{singular_value_range, DenseLu};
use crate::operators::{boundary_integral, BoundaryMatrixField, BoundaryOperators, BoundaryVectorField};
use crate::robin::{drift_gradient, SolutionRep, SolveDiagnostics, MAX_CONDITION};

const MAX_HALVINGS: usize = 5;

/// Nodal description of `G(x_i, u)` supplied by the caller.
pub trait NodalModel: Send + Sync {
    fn value(&self, node: usize, u: &Vector2<f64>) -> Vector2<f64>;

    /// `d_u G(x_i, u)`, if known.
    fn jacobian(&self, _node: usize, _u: &Vector2<f64>) -> Option<Matrix2<f64>> {
        None
    }
}

/// The boundary nonlinearity `G`.
#[derive(Clone)]
pub enum TractionModel {
    /// `G(x, u) = M(x) u + h(x)`.
    Affine { m: BoundaryMatrixField, h: BoundaryVectorField },
    /// `G(x, u) = h(x) + kappa u / (1 + |u|^2)`.
    Saturating { h: BoundaryVectorField, kappa: f64 },
    Tabulated(Arc<dyn NodalModel>),
}

impl fmt::Debug for TractionModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TractionModel::Affine { .. } => f.write_str("TractionModel::Affine"),
            TractionModel::Saturating { kappa, .. } => write!(f, "TractionModel::Saturating {{ kappa: {kappa} }}"),
            TractionModel::Tabulated(_) => f.write_str("TractionModel::Tabulated"),
        }
    }
}

impl TractionModel {
    /// The affine model of a linear Robin condition with `a = I`.
    pub fn from_robin(b: &BoundaryMatrixField, g: &BoundaryVectorField) -> Self {
        TractionModel::Affine {
            m: BoundaryMatrixField::from_values(b.values().iter().map(|m| -m).collect()),
            h: g.clone(),
        }
    }

    fn check(&self, curve: &BoundaryCurve) -> Result<()> {
        match self {
            TractionModel::Affine { m, h } => {
                m.check(curve)?;
                h.check(curve)
            }
            TractionModel::Saturating { h, .. } => h.check(curve),
            TractionModel::Tabulated(_) => Ok(()),
        }
    }
}

/// `G(x_i, u)`.
pub fn apply_model(model: &TractionModel, node: usize, u: &Vector2<f64>) -> Vector2<f64> {
    match model {
        TractionModel::Affine { m, h } => m.get(node) * u + h.get(node),
        TractionModel::Saturating { h, kappa } => h.get(node) + u * (*kappa / (1.0 + u.norm_squared())),
        TractionModel::Tabulated(t) => t.value(node, u),
    }
}

/// `d_u G(x_i, u)`, or `None` for tabulated models without one.
pub fn model_jacobian(model: &TractionModel, node: usize, u: &Vector2<f64>) -> Option<Matrix2<f64>> {
    match model {
        TractionModel::Affine { m, .. } => Some(m.get(node)),
        TractionModel::Saturating { kappa, .. } => {
            let s = 1.0 + u.norm_squared();
            Some((Matrix2::identity() * s - u * u.transpose() * 2.0) * (*kappa / (s * s)))
        }
        TractionModel::Tabulated(t) => t.jacobian(node, u),
    }
}

fn jacobian_or_fd(model: &TractionModel, node: usize, u: &Vector2<f64>) -> Matrix2<f64> {
    model_jacobian(model, node, u).unwrap_or_else(|| {
        let h = 1e-7 * (1.0 + u.amax());
        let mut jac = Matrix2::zeros();
        for k in 0..2 {
            let mut up = *u;
            let mut um = *u;
            up[k] += h;
            um[k] -= h;
            jac.set_column(k, &((apply_model(model, node, &up) - apply_model(model, node, &um)) / (2.0 * h)));
        }
        jac
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    /// Chord iteration with the Jacobian frozen at the initial guess.
    Picard,
    Newton,
}

#[derive(Clone, Debug)]
pub struct NonlinearOptions {
    pub method: Method,
    /// Initial step length in `(0, 1]`; halved while the residual grows.
    pub damping: f64,
    pub max_iter: usize,
    /// Stop once the sup-norm of the update is below this.
    pub tol: f64,
    /// Starting `(mu, c)`; zero when absent.
    pub initial: Option<(BoundaryVectorField, Vector2<f64>)>,
}

impl Default for NonlinearOptions {
    fn default() -> Self {
        Self {
            method: Method::Newton,
            damping: 1.0,
            max_iter: 50,
            tol: 1e-12,
            initial: None,
        }
    }
}

impl NonlinearOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return Err(Error::Config(format!("damping must lie in (0, 1], got {}", self.damping)));
        }
        if !(self.tol > 0.0) {
            return Err(Error::InvalidTolerance { tol: self.tol });
        }
        if self.max_iter == 0 {
            return Err(Error::Config("max_iter must be positive".into()));
        }
        Ok(())
    }
}

struct Problem<'a> {
    model: &'a TractionModel,
    curve: &'a BoundaryCurve,
    ops: &'a BoundaryOperators,
    /// `B q^{-1} x_i`
    linear: Vec<Vector2<f64>>,
    /// `T(omega, B q^{-1}) nu_i`
    drift_traction: Vec<Vector2<f64>>,
}

impl Problem<'_> {
    fn n(&self) -> usize {
        self.curve.len()
    }

    fn boundary_values(&self, x: &DVector<f64>) -> Vec<Vector2<f64>> {
        let n = self.n();
        let vmu = &self.ops.single_layer.matrix * x.rows(0, 2 * n);
        let c = Vector2::new(x[2 * n], x[2 * n + 1]);
        (0..n)
            .map(|i| Vector2::new(vmu[2 * i], vmu[2 * i + 1]) + c + self.linear[i])
            .collect()
    }

    fn residual(&self, x: &DVector<f64>) -> DVector<f64> {
        let n = self.n();
        let mu = x.rows(0, 2 * n);
        let wmu = &self.ops.wstar.matrix * mu;
        let u = self.boundary_values(x);
        let mut f = DVector::zeros(2 * n + 2);
        for i in 0..n {
            let g = apply_model(self.model, i, &u[i]);
            for l in 0..2 {
                f[2 * i + l] = 0.5 * mu[2 * i + l] + wmu[2 * i + l] - g[l] + self.drift_traction[i][l];
            }
        }
        let perimeter = self.curve.perimeter();
        for j in 0..n {
            let w = self.curve.weight(j) / perimeter;
            f[2 * n] += w * mu[2 * j];
            f[2 * n + 1] += w * mu[2 * j + 1];
        }
        f
    }

    fn jacobian(&self, x: &DVector<f64>) -> DMatrix<f64> {
        let n = self.n();
        let u = self.boundary_values(x);
        let v = &self.ops.single_layer.matrix;
        let mut jac = DMatrix::zeros(2 * n + 2, 2 * n + 2);
        for i in 0..n {
            let dg = jacobian_or_fd(self.model, i, &u[i]);
            let rows = dg * v.rows(2 * i, 2);
            jac.view_mut((2 * i, 0), (2, 2 * n))
                .copy_from(&(self.ops.wstar.matrix.rows(2 * i, 2) - rows));
            jac[(2 * i, 2 * i)] += 0.5;
            jac[(2 * i + 1, 2 * i + 1)] += 0.5;
            jac.view_mut((2 * i, 2 * n), (2, 2)).copy_from(&(-dg));
        }
        let perimeter = self.curve.perimeter();
        for j in 0..n {
            let w = self.curve.weight(j) / perimeter;
            jac[(2 * n, 2 * j)] = w;
            jac[(2 * n + 1, 2 * j + 1)] = w;
        }
        jac
    }
}

/// Factors a Jacobian, reporting rank deficiency through its singular values.
fn factor(jac: DMatrix<f64>) -> Result<(DenseLu, f64)> {
    let deficient = |jac: &DMatrix<f64>| {
        let (sigma_min, sigma_max) = singular_value_range(jac);
        Error::RankDeficient { sigma_min, sigma_max }
    };
    match DenseLu::new(jac.clone()) {
        Ok(lu) => {
            let cond = lu.condition_estimate();
            if cond <= MAX_CONDITION {
                Ok((lu, cond))
            } else {
                Err(deficient(&jac))
            }
        }
        Err(_) => Err(deficient(&jac)),
    }
}

/// Solves the nonlinear traction problem for `(mu, c)`.
///
/// Fails with [`Error::RankDeficient`] when the linearized system is
/// singular (for example `G = 0`, which leaves `c` free) and with
/// [`Error::NonConvergence`] after `max_iter` iterations.
pub fn solve_nonlinear_robin(
    model: &TractionModel,
    drift: &Matrix2<f64>,
    curve: &BoundaryCurve,
    kernel: &PeriodicLame,
    ops: &BoundaryOperators,
    options: &NonlinearOptions,
) -> Result<SolutionRep> {
    model.check(curve)?;
    options.validate()?;
    let n = curve.len();
    let bq = drift_gradient(drift, curve);
    let tb = traction_map2(kernel.env().omega(), &bq);
    let problem = Problem {
        model,
        curve,
        ops,
        linear: curve.points().iter().map(|p| bq * p.point).collect(),
        drift_traction: curve.points().iter().map(|p| tb * p.normal).collect(),
    };

    let mut x = DVector::zeros(2 * n + 2);
    if let Some((mu0, c0)) = &options.initial {
        mu0.check(curve)?;
        x.rows_mut(0, 2 * n).copy_from(&mu0.to_flat());
        x[2 * n] = c0[0];
        x[2 * n + 1] = c0[1];
    }

    let mut f = problem.residual(&x);
    let (mut lu, mut cond) = factor(problem.jacobian(&x))?;
    let mut trace = Vec::new();
    let mut last_update = f64::INFINITY;
    let mut converged = false;
    for iter in 0..options.max_iter {
        if iter > 0 && options.method == Method::Newton {
            (lu, cond) = factor(problem.jacobian(&x))?;
        }
        let step = lu.solve(&(-&f));
        let f_norm = f.amax();
        let mut lambda = options.damping;
        let mut trial = &x + &step * lambda;
        let mut f_trial = problem.residual(&trial);
        for _ in 0..MAX_HALVINGS {
            if f_trial.amax() <= f_norm {
                break;
            }
            lambda *= 0.5;
            trial = &x + &step * lambda;
            f_trial = problem.residual(&trial);
        }
        last_update = (&step * lambda).amax();
        x = trial;
        f = f_trial;
        trace.push(last_update);
        if last_update < options.tol {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NonConvergence {
            iterations: trace.len(),
            last_update,
            last_residual: f.amax(),
        });
    }

    let mu = BoundaryVectorField::from_flat(&x.rows(0, 2 * n).into_owned());
    let mean_constraint = boundary_integral(&mu, curve)?.norm();
    Ok(SolutionRep {
        mu,
        c: Vector2::new(x[2 * n], x[2 * n + 1]),
        drift: *drift,
        diagnostics: SolveDiagnostics {
            residual_on_node: f.amax(),
            // G is only known at the nodes
            residual_off_node: f64::NAN,
            condition_estimate: cond,
            det_integral_ainv_b: f64::NAN,
            integral_condition: f64::NAN,
            mean_constraint,
            iterations: trace.len(),
            trace,
        },
    })
}

/// Residual of the discrete nonlinear equation at a given `(mu, c)`, in the
/// sup norm over all rows including the mean constraint.
pub fn nonlinear_residual(
    model: &TractionModel,
    rep: &SolutionRep,
    curve: &BoundaryCurve,
    kernel: &PeriodicLame,
    ops: &BoundaryOperators,
) -> Result<f64> {
    model.check(curve)?;
    rep.mu.check(curve)?;
    let n = curve.len();
    let bq = drift_gradient(&rep.drift, curve);
    let tb = traction_map2(kernel.env().omega(), &bq);
    let problem = Problem {
        model,
        curve,
        ops,
        linear: curve.points().iter().map(|p| bq * p.point).collect(),
        drift_traction: curve.points().iter().map(|p| tb * p.normal).collect(),
    };
    let mut x = DVector::zeros(2 * n + 2);
    x.rows_mut(0, 2 * n).copy_from(&rep.mu.to_flat());
    x[2 * n] = rep.c[0];
    x[2 * n + 1] = rep.c[1];
    Ok(problem.residual(&x).amax())
}

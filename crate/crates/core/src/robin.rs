//! Linear Robin traction problem in the perforated domain.
//!
//! Find `u` with `L[omega] u = 0` outside the holes, `u(x + q e_j) = u(x) + B e_j`
//! and `a T(omega, Du) nu + b u = g` on the hole boundary. The solution is
//! sought as `u = v_q[mu] + c + B q^{-1} x` with a zero-mean density `mu`;
//! taking the traction from the perforated side gives, after multiplying by
//! `a^{-1}`,
//!
//! ```text
//! mu/2 + W* mu + a^{-1} b (V mu + c) = a^{-1} g - T(omega, B q^{-1}) nu - a^{-1} b B q^{-1} x,
//! \int mu dsigma = 0.
//! ```

use std::fmt;

use nalgebra::{DMatrix, DVector, Matrix2, SymmetricEigen, Vector2};

use crate::error::{Error, Result};
use crate::geometry::{BoundaryCurve, Point};
use crate::kernels::{traction_map2, PeriodicLame};
use crate::linalg::{singular_value_range, DenseLu};
use crate::operators::{
    assemble_operators, boundary_integral, collocation_rows, BoundaryMatrixField, BoundaryOperators,
    BoundaryVectorField, FieldSample, PotentialEvaluator,
};
use crate::quadrature::TrigInterpolant;

/// Systems whose condition estimate exceeds this are rejected.
pub const MAX_CONDITION: f64 = 1e13;
const DET_REL: f64 = 1e-12;
const NEG_REL: f64 = 1e-10;

/// The admissibility conditions on the Robin coefficients.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Condition {
    /// `det a(x) != 0` at every node.
    InvertibleA,
    /// `xi^t a^{-1}(x) b(x) xi <= 0` at every node.
    Negativity,
    /// `det \int a^{-1} b dsigma != 0`.
    InvertibleIntegral,
    /// `det b(x0) != 0` for some node `x0`.
    NondegenerateB,
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Condition::InvertibleA => "invertible-a",
            Condition::Negativity => "negativity",
            Condition::InvertibleIntegral => "invertible-integral",
            Condition::NondegenerateB => "nondegenerate-b",
        })
    }
}

/// One failed admissibility condition with its worst node and margin.
#[derive(Clone, Debug, PartialEq)]
pub struct AdmissibilityFailure {
    pub condition: Condition,
    pub node: Option<usize>,
    pub value: f64,
    pub threshold: f64,
}

impl fmt::Display for AdmissibilityFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} violated", self.condition)?;
        if let Some(i) = self.node {
            write!(f, " at node {i}")?;
        }
        write!(f, " (value {:e}, threshold {:e})", self.value, self.threshold)
    }
}

/// Outcome of one admissibility check.
#[derive(Clone, Debug, PartialEq)]
pub struct ConditionCheck {
    pub condition: Condition,
    pub pass: bool,
    /// Node attaining the worst value, when the condition is pointwise.
    pub node: Option<usize>,
    pub value: f64,
    pub threshold: f64,
}

/// Diagnostics of [`validate_robin_data`].
#[derive(Clone, Debug, PartialEq)]
pub struct AdmissibilityReport {
    pub checks: Vec<ConditionCheck>,
    /// `det \int a^{-1} b dsigma` (discrete).
    pub det_integral: f64,
    /// 2-norm condition number of `\int a^{-1} b dsigma`.
    pub integral_condition: f64,
}

impl AdmissibilityReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> Vec<AdmissibilityFailure> {
        self.checks
            .iter()
            .filter(|c| !c.pass)
            .map(|c| AdmissibilityFailure {
                condition: c.condition,
                node: c.node,
                value: c.value,
                threshold: c.threshold,
            })
            .collect()
    }
}

/// Coefficients, datum and drift of the Robin problem, sampled at the nodes.
#[derive(Clone, Debug)]
pub struct RobinData {
    pub a: BoundaryMatrixField,
    pub b: BoundaryMatrixField,
    pub g: BoundaryVectorField,
    /// Drift `B` of the quasi-periodicity condition.
    pub drift: Matrix2<f64>,
}

impl RobinData {
    fn check(&self, curve: &BoundaryCurve) -> Result<()> {
        self.a.check(curve)?;
        self.b.check(curve)?;
        self.g.check(curve)
    }
}

/// `B q^{-1}`
pub fn drift_gradient(drift: &Matrix2<f64>, curve: &BoundaryCurve) -> Matrix2<f64> {
    let q = curve.cell().edges();
    drift * Matrix2::new(1.0 / q[0], 0.0, 0.0, 1.0 / q[1])
}

fn max_norm(field: &BoundaryMatrixField) -> f64 {
    field.values().iter().map(|m| m.norm()).fold(0.0, f64::max)
}

/// Checks the admissibility assumptions on `(a, b)` node by node.
///
/// Returns the full report when every condition holds and
/// [`Error::Inadmissible`] listing the failed conditions otherwise.
pub fn validate_robin_data(data: &RobinData, curve: &BoundaryCurve) -> Result<AdmissibilityReport> {
    data.check(curve)?;
    let report = admissibility_report(data, curve);
    if report.passed() {
        Ok(report)
    } else {
        Err(Error::Inadmissible(report.failures()))
    }
}

/// The report of [`validate_robin_data`] without turning failures into errors.
pub fn admissibility_report(data: &RobinData, curve: &BoundaryCurve) -> AdmissibilityReport {
    let n = curve.len();
    let scale_a = max_norm(&data.a);
    let scale_b = max_norm(&data.b);
    let mut checks = Vec::new();

    // det a
    let (worst, det_min) = (0..n)
        .map(|i| (i, data.a.get(i).determinant().abs()))
        .fold((0, f64::INFINITY), |acc, v| if v.1 < acc.1 { v } else { acc });
    let thr = DET_REL * scale_a * scale_a;
    let a_ok = det_min > thr;
    checks.push(ConditionCheck {
        condition: Condition::InvertibleA,
        pass: a_ok,
        node: Some(worst),
        value: det_min,
        threshold: thr,
    });

    let ainv_b: Vec<Matrix2<f64>> = (0..n)
        .map(|i| {
            data.a
                .get(i)
                .try_inverse()
                .map_or(Matrix2::from_element(f64::NAN), |inv| inv * data.b.get(i))
        })
        .collect();

    if a_ok {
        let scale = ainv_b.iter().map(|m| m.norm()).fold(0.0, f64::max);
        let (worst, max_eig) = ainv_b
            .iter()
            .enumerate()
            .map(|(i, m)| {
                let sym = (m + m.transpose()) * 0.5;
                (i, SymmetricEigen::new(sym).eigenvalues.max())
            })
            .fold((0, f64::NEG_INFINITY), |acc, v| if v.1 > acc.1 { v } else { acc });
        let thr = NEG_REL * scale;
        checks.push(ConditionCheck {
            condition: Condition::Negativity,
            pass: max_eig <= thr,
            node: Some(worst),
            value: max_eig,
            threshold: thr,
        });
    }

    let mut det_integral = f64::NAN;
    let mut integral_condition = f64::INFINITY;
    if a_ok {
        let integral: Matrix2<f64> = ainv_b.iter().enumerate().map(|(j, m)| m * curve.weight(j)).sum();
        det_integral = integral.determinant();
        let sv = integral.singular_values();
        integral_condition = if sv.min() > 0.0 { sv.max() / sv.min() } else { f64::INFINITY };
        let thr = DET_REL * integral.norm_squared();
        checks.push(ConditionCheck {
            condition: Condition::InvertibleIntegral,
            pass: det_integral.abs() > thr,
            node: None,
            value: det_integral.abs(),
            threshold: thr,
        });
    }

    let (best, det_max) = (0..n)
        .map(|i| (i, data.b.get(i).determinant().abs()))
        .fold((0, f64::NEG_INFINITY), |acc, v| if v.1 > acc.1 { v } else { acc });
    let thr = DET_REL * scale_b * scale_b;
    checks.push(ConditionCheck {
        condition: Condition::NondegenerateB,
        pass: det_max > thr,
        node: Some(best),
        value: det_max,
        threshold: thr,
    });

    AdmissibilityReport {
        checks,
        det_integral,
        integral_condition,
    }
}

/// Square system of the discretized integral equation with the mean constraint.
///
/// Rows `2i + l` collocate component `l` at node `i`; rows `2N, 2N + 1` are
/// the quadrature of `\int mu dsigma = 0` divided by the perimeter. Columns
/// `2j + l` hold `mu_l(x_j)`, columns `2N, 2N + 1` the constant `c`.
#[derive(Clone, Debug)]
pub struct DiscreteSystem {
    pub matrix: DMatrix<f64>,
    pub rhs: DVector<f64>,
    pub nodes: usize,
}

impl DiscreteSystem {
    pub fn mu_index(&self, node: usize, component: usize) -> usize {
        2 * node + component
    }

    pub fn c_index(&self, component: usize) -> usize {
        2 * self.nodes + component
    }

    pub fn dim(&self) -> usize {
        2 * self.nodes + 2
    }
}

/// Right-hand side `a^{-1} g - T(omega, B q^{-1}) nu - a^{-1} b B q^{-1} x` at node `i`.
pub fn robin_rhs_at(data: &RobinData, curve: &BoundaryCurve, omega: f64, i: usize) -> Vector2<f64> {
    let p = curve.point(i);
    let bq = drift_gradient(&data.drift, curve);
    let ainv = data.a.get(i).try_inverse().unwrap_or(Matrix2::from_element(f64::NAN));
    ainv * data.g.get(i) - traction_map2(omega, &bq) * p.normal - ainv * data.b.get(i) * bq * p.point
}

/// Assembles the augmented collocation system from precomputed operators.
pub fn assemble_robin_system(
    data: &RobinData,
    curve: &BoundaryCurve,
    ops: &BoundaryOperators,
    kernel: &PeriodicLame,
) -> Result<DiscreteSystem> {
    data.check(curve)?;
    let n = curve.len();
    if ops.single_layer.nodes() != n || ops.wstar.nodes() != n {
        return Err(Error::FieldSize {
            expected: n,
            got: ops.single_layer.nodes(),
        });
    }
    let omega = kernel.env().omega();
    let dim = 2 * n + 2;
    let mut m = DMatrix::zeros(dim, dim);
    let mut rhs = DVector::zeros(dim);
    let v = &ops.single_layer.matrix;
    let w = &ops.wstar.matrix;
    for i in 0..n {
        let ainv = data
            .a
            .get(i)
            .try_inverse()
            .ok_or_else(|| Error::Assembly(format!("a is singular at node {i}")))?;
        let coupling = ainv * data.b.get(i);
        let rows = 2 * i..2 * i + 2;
        let mut block = m.view_mut((2 * i, 0), (2, 2 * n));
        block.copy_from(&(coupling * v.rows(rows.start, 2) + w.rows(rows.start, 2)));
        m[(2 * i, 2 * i)] += 0.5;
        m[(2 * i + 1, 2 * i + 1)] += 0.5;
        m.view_mut((2 * i, 2 * n), (2, 2)).copy_from(&coupling);
        let r = robin_rhs_at(data, curve, omega, i);
        rhs[2 * i] = r[0];
        rhs[2 * i + 1] = r[1];
    }
    let perimeter = curve.perimeter();
    for j in 0..n {
        let wj = curve.weight(j) / perimeter;
        m[(2 * n, 2 * j)] = wj;
        m[(2 * n + 1, 2 * j + 1)] = wj;
    }
    Ok(DiscreteSystem { matrix: m, rhs, nodes: n })
}

/// Residuals and conditioning of a solve.
#[derive(Clone, Debug, PartialEq)]
pub struct SolveDiagnostics {
    /// Max-norm residual of the discrete system at the solution.
    pub residual_on_node: f64,
    /// Max-norm residual of the integral equation at the midpoints between
    /// nodes, with `mu` and the data interpolated trigonometrically.
    pub residual_off_node: f64,
    pub condition_estimate: f64,
    pub det_integral_ainv_b: f64,
    pub integral_condition: f64,
    /// `|\int mu dsigma|`
    pub mean_constraint: f64,
    /// Nonlinear iterations (zero for linear solves).
    pub iterations: usize,
    /// Sup-norm of the last update, per iteration (nonlinear solves only).
    pub trace: Vec<f64>,
}

/// `u = v_q[mu] + c + B q^{-1} x`.
#[derive(Clone, Debug)]
pub struct SolutionRep {
    pub mu: BoundaryVectorField,
    pub c: Vector2<f64>,
    pub drift: Matrix2<f64>,
    pub diagnostics: SolveDiagnostics,
}

/// Trigonometric interpolants of the Robin data entries.
struct DataInterpolants {
    a: [TrigInterpolant; 4],
    b: [TrigInterpolant; 4],
    g: [TrigInterpolant; 2],
}

fn matrix_interpolants(field: &BoundaryMatrixField, curve: &BoundaryCurve) -> [TrigInterpolant; 4] {
    let entry = |k: usize| {
        let s: Vec<f64> = field.values().iter().map(|m| m[(k / 2, k % 2)]).collect();
        TrigInterpolant::new(&s, curve.offset())
    };
    [entry(0), entry(1), entry(2), entry(3)]
}

fn eval_matrix(interp: &[TrigInterpolant; 4], t: f64) -> Matrix2<f64> {
    Matrix2::new(interp[0].eval(t), interp[1].eval(t), interp[2].eval(t), interp[3].eval(t))
}

impl DataInterpolants {
    fn new(data: &RobinData, curve: &BoundaryCurve) -> Self {
        Self {
            a: matrix_interpolants(&data.a, curve),
            b: matrix_interpolants(&data.b, curve),
            g: data.g.interpolant(curve),
        }
    }
}

/// Residual of the integral equation at `n_points` parameters halfway
/// between nodes.
pub fn off_node_residual(
    rep: &SolutionRep,
    data: &RobinData,
    curve: &BoundaryCurve,
    kernel: &PeriodicLame,
    n_points: usize,
) -> Result<f64> {
    let interp = DataInterpolants::new(data, curve);
    let mu_interp = rep.mu.interpolant(curve);
    let flat = rep.mu.to_flat();
    let bq = drift_gradient(&rep.drift, curve);
    let omega = kernel.env().omega();
    let n = curve.len();
    let stride = (n / n_points.max(1)).max(1);
    let mut worst: f64 = 0.0;
    for i in (0..n).step_by(stride) {
        let t = curve.point(i).t + 0.5 * curve.step();
        let geom = curve.at(t);
        let (vrow, wrow) = collocation_rows(curve, kernel, t)?;
        let vmu = Vector2::new((vrow.row(0) * &flat)[0], (vrow.row(1) * &flat)[0]);
        let wmu = Vector2::new((wrow.row(0) * &flat)[0], (wrow.row(1) * &flat)[0]);
        let mu = Vector2::new(mu_interp[0].eval(t), mu_interp[1].eval(t));
        let a = eval_matrix(&interp.a, t);
        let b = eval_matrix(&interp.b, t);
        let g = Vector2::new(interp.g[0].eval(t), interp.g[1].eval(t));
        let ainv = a.try_inverse().unwrap_or(Matrix2::from_element(f64::NAN));
        let lhs = mu * 0.5 + wmu + ainv * b * (vmu + rep.c);
        let rhs = ainv * g - traction_map2(omega, &bq) * geom.normal - ainv * b * bq * geom.point;
        worst = worst.max((lhs - rhs).amax());
    }
    Ok(worst)
}

/// Solves the linear Robin problem. Validates the data first.
pub fn solve_robin(data: &RobinData, curve: &BoundaryCurve, kernel: &PeriodicLame) -> Result<SolutionRep> {
    let report = validate_robin_data(data, curve)?;
    let ops = assemble_operators(curve, kernel)?;
    solve_robin_with(data, curve, kernel, &ops, &report)
}

/// [`solve_robin`] with operators and validation already available.
pub fn solve_robin_with(
    data: &RobinData,
    curve: &BoundaryCurve,
    kernel: &PeriodicLame,
    ops: &BoundaryOperators,
    report: &AdmissibilityReport,
) -> Result<SolutionRep> {
    let system = assemble_robin_system(data, curve, ops, kernel)?;
    let lu = DenseLu::new(system.matrix.clone())?;
    let condition = lu.condition_estimate();
    if !(condition <= MAX_CONDITION) {
        return Err(Error::SingularSystem { condition });
    }
    let x = lu.solve(&system.rhs);
    let residual_on_node = (&system.matrix * &x - &system.rhs).amax();
    let n = curve.len();
    let mu = BoundaryVectorField::from_flat(&x.rows(0, 2 * n).into_owned());
    let c = Vector2::new(x[2 * n], x[2 * n + 1]);
    let mean_constraint = boundary_integral(&mu, curve)?.norm();
    let mut rep = SolutionRep {
        mu,
        c,
        drift: data.drift,
        diagnostics: SolveDiagnostics {
            residual_on_node,
            residual_off_node: f64::NAN,
            condition_estimate: condition,
            det_integral_ainv_b: report.det_integral,
            integral_condition: report.integral_condition,
            mean_constraint,
            iterations: 0,
            trace: Vec::new(),
        },
    };
    rep.diagnostics.residual_off_node = off_node_residual(&rep, data, curve, kernel, n)?;
    Ok(rep)
}

/// Evaluates a solution representation at many points.
#[derive(Debug)]
pub struct SolutionEvaluator<'a> {
    curve: &'a BoundaryCurve,
    potential: PotentialEvaluator<'a>,
    c: Vector2<f64>,
    drift_grad: Matrix2<f64>,
}

impl<'a> SolutionEvaluator<'a> {
    pub fn new(rep: &SolutionRep, curve: &'a BoundaryCurve, kernel: &'a PeriodicLame) -> Result<Self> {
        Ok(Self {
            curve,
            potential: PotentialEvaluator::new(curve, kernel, &rep.mu)?,
            c: rep.c,
            drift_grad: drift_gradient(&rep.drift, curve),
        })
    }

    /// `u(x)`; fails inside a hole.
    pub fn eval(&self, x: &Point) -> Result<FieldSample<Vector2<f64>>> {
        if self.curve.in_hole(x) && self.curve.distance_to(x) > 0.0 {
            return Err(Error::InsideHole(x[0], x[1]));
        }
        let v = self.potential.single_layer(x)?;
        Ok(FieldSample {
            value: v.value + self.c + self.drift_grad * x,
            near_boundary: v.near_boundary,
        })
    }
}

/// `u(x) = v_q[omega, mu](x) + c + B q^{-1} x` at one point.
pub fn eval_solution(
    rep: &SolutionRep,
    x: &Point,
    curve: &BoundaryCurve,
    kernel: &PeriodicLame,
) -> Result<FieldSample<Vector2<f64>>> {
    SolutionEvaluator::new(rep, curve, kernel)?.eval(x)
}

/// Solution of `(I/2 + W*) mu = psi`.
#[derive(Clone, Debug)]
pub struct NeumannSolution {
    pub mu: BoundaryVectorField,
    /// `||(I/2 + W*) mu - psi||_inf`
    pub residual: f64,
    pub condition_estimate: f64,
}

/// Solves the second-kind system `(I/2 + W*) mu = psi` by LU.
pub fn solve_neumann_aux(psi: &BoundaryVectorField, curve: &BoundaryCurve, ops: &BoundaryOperators) -> Result<NeumannSolution> {
    psi.check(curve)?;
    let n = curve.len();
    let mut m = ops.wstar.matrix.clone();
    for k in 0..2 * n {
        m[(k, k)] += 0.5;
    }
    let lu = DenseLu::new(m.clone())?;
    let condition_estimate = lu.condition_estimate();
    if !(condition_estimate <= MAX_CONDITION) {
        return Err(Error::SingularSystem {
            condition: condition_estimate,
        });
    }
    let b = psi.to_flat();
    let x = lu.solve(&b);
    let residual = (&m * &x - &b).amax();
    Ok(NeumannSolution {
        mu: BoundaryVectorField::from_flat(&x),
        residual,
        condition_estimate,
    })
}

/// Recovered representation `u = v_q[mu] + c` of a periodic Lamé field.
#[derive(Clone, Debug)]
pub struct Representation {
    pub mu: BoundaryVectorField,
    pub c: Vector2<f64>,
    /// Largest nodal mismatch `|u - V mu - c|`.
    pub mismatch: f64,
}

/// Recovers `(mu, c)` with `u = v_q[mu] + c` from the nodal values of `u` and
/// its traction `T(omega, Du) nu` taken from the perforated side.
///
/// `mu` solves `(I/2 + W*) mu = traction`; `c` is the boundary mean of
/// `u - V mu`. Fails when the nodal mismatch exceeds `tol`.
pub fn representation_roundtrip(
    values: &BoundaryVectorField,
    traction: &BoundaryVectorField,
    curve: &BoundaryCurve,
    ops: &BoundaryOperators,
    tol: f64,
) -> Result<Representation> {
    values.check(curve)?;
    let mu = solve_neumann_aux(traction, curve, ops)?.mu;
    let vmu = ops.single_layer.apply(&mu)?;
    let diff: Vec<Vector2<f64>> = values.values().iter().zip(vmu.values()).map(|(u, v)| u - v).collect();
    let diff = BoundaryVectorField::new(curve, diff)?;
    let c = boundary_integral(&diff, curve)? / curve.perimeter();
    let mismatch = diff.values().iter().map(|d| (d - c).amax()).fold(0.0, f64::max);
    if !(mismatch <= tol) {
        return Err(Error::RepresentationMismatch { mismatch, tol });
    }
    Ok(Representation { mu, c, mismatch })
}

/// Smallest and largest singular values of the augmented system matrix, used
/// to report rank deficiency instead of solving.
pub fn system_singular_values(system: &DiscreteSystem) -> (f64, f64) {
    singular_value_range(&system.matrix)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{PeriodicityCell, ShapeSpec};

    fn circle(n: usize) -> BoundaryCurve {
        let shape = ShapeSpec::Circle {
            center: [0.5, 0.5],
            radius: 0.25,
        };
        BoundaryCurve::discretize(&shape, n, &PeriodicityCell::unit()).unwrap()
    }

    fn data(curve: &BoundaryCurve, b: Matrix2<f64>) -> RobinData {
        RobinData {
            a: BoundaryMatrixField::constant(curve, Matrix2::identity()),
            b: BoundaryMatrixField::constant(curve, b),
            g: BoundaryVectorField::constant(curve, Vector2::zeros()),
            drift: Matrix2::zeros(),
        }
    }

    #[test]
    fn constant_coefficients_validate() {
        let curve = circle(32);
        let report = validate_robin_data(&data(&curve, -Matrix2::identity()), &curve).unwrap();
        let l = curve.perimeter();
        assert!((report.det_integral - l * l).abs() < 1e-12);
        assert!((report.integral_condition - 1.0).abs() < 1e-12);
    }

    #[test]
    fn positive_b_fails_negativity() {
        let curve = circle(32);
        match validate_robin_data(&data(&curve, Matrix2::identity()), &curve) {
            Err(Error::Inadmissible(f)) => {
                assert_eq!(f.len(), 1);
                assert_eq!(f[0].condition, Condition::Negativity);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn zero_b_fails_integral_and_determinant() {
        let curve = circle(32);
        match validate_robin_data(&data(&curve, Matrix2::zeros()), &curve) {
            Err(Error::Inadmissible(f)) => {
                let conds: Vec<_> = f.iter().map(|x| x.condition).collect();
                assert_eq!(conds, vec![Condition::InvertibleIntegral, Condition::NondegenerateB]);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn error_message_names_condition() {
        let curve = circle(16);
        let err = validate_robin_data(&data(&curve, Matrix2::identity()), &curve).unwrap_err();
        assert!(err.to_string().contains("negativity"), "{err}");
    }
}

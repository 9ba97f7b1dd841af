//! Nyström discretization of the periodic single-layer operator `V` and the
//! traction operator `W*` on the hole boundary, plus off-boundary evaluation
//! of the single-layer potential and its traction.
//!
//! Unknowns are laid out node-major: entry `2 j + l` of a flat vector is
//! component `l` at node `j`.
//!
//! Kernel splitting along the curve, with `theta = s - t` and `d = x(s) - x(t)`:
//!
//! * `V`: `Gamma(d) = (A / 2pi) ln|d| I - (beta / 4pi) d d^t / |d|^2`. The
//!   logarithm is written as `1/2 ln(4 sin^2(theta/2))` (log quadrature) plus
//!   `ln|d| - 1/2 ln(4 sin^2(theta/2))` (smooth, limit `ln|x'|`).
//! * `W*`: the free traction kernel has no logarithmic part. Its skew part
//!   `c_a (d x nu) / |d|^2 E`, `E = [[0, 1], [-1, 0]]`, behaves like
//!   `c_a E 1/2 cot((t - s)/2)` and is integrated with the conjugate-function
//!   rule; everything else is smooth.
//! * The periodic remainder `R^q` is analytic and uses the plain trapezoid rule.

use std::collections::HashMap;
use std::f64::consts::{PI, TAU};
use std::sync::{Arc, Mutex};

use nalgebra::{DMatrix, DVector, Matrix2, Vector2};

use crate::error::{Error, Result};
use crate::geometry::{BoundaryCurve, CurvePoint, Point};
use crate::kernels::{
    traction_constants, traction_from_grad, traction_kernel2, PeriodicLame,
};
use crate::quadrature::{hilbert_weight, hilbert_weights, log_sin2, log_weight, log_weights, TrigInterpolant};

/// Below this `|sin(theta/2)|` a target counts as sitting on the source node.
const COINCIDENT: f64 = 1e-12;
/// Off-boundary points closer than this many node spacings are flagged.
pub const NEAR_BOUNDARY_SPACINGS: f64 = 3.0;
/// Largest upsampling factor used for off-boundary quadrature.
const MAX_UPSAMPLING: usize = 32;

const SKEW: Matrix2<f64> = Matrix2::new(0.0, 1.0, -1.0, 0.0);

/// Nodal samples of a vector field on the curve.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryVectorField {
    values: Vec<Vector2<f64>>,
}

impl BoundaryVectorField {
    pub fn new(curve: &BoundaryCurve, values: Vec<Vector2<f64>>) -> Result<Self> {
        if values.len() != curve.len() {
            return Err(Error::FieldSize {
                expected: curve.len(),
                got: values.len(),
            });
        }
        Ok(Self { values })
    }

    pub fn from_fn(curve: &BoundaryCurve, f: impl Fn(&CurvePoint) -> Vector2<f64>) -> Self {
        Self {
            values: curve.points().iter().map(f).collect(),
        }
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            values: vec![Vector2::zeros(); n],
        }
    }

    /// Unchecked; sizes are verified when the field meets a curve.
    pub fn from_values(values: Vec<Vector2<f64>>) -> Self {
        Self { values }
    }

    pub fn constant(curve: &BoundaryCurve, v: Vector2<f64>) -> Self {
        Self {
            values: vec![v; curve.len()],
        }
    }

    /// Node-major flat vector back to a field.
    pub fn from_flat(flat: &DVector<f64>) -> Self {
        Self {
            values: flat
                .as_slice()
                .chunks_exact(2)
                .map(|c| Vector2::new(c[0], c[1]))
                .collect(),
        }
    }

    pub fn to_flat(&self) -> DVector<f64> {
        DVector::from_iterator(2 * self.values.len(), self.values.iter().flat_map(|v| [v[0], v[1]]))
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[Vector2<f64>] {
        &self.values
    }

    pub fn get(&self, i: usize) -> Vector2<f64> {
        self.values[i]
    }

    /// Largest absolute component.
    pub fn sup_norm(&self) -> f64 {
        self.values.iter().map(|v| v.amax()).fold(0.0, f64::max)
    }

    pub fn check(&self, curve: &BoundaryCurve) -> Result<()> {
        if self.len() != curve.len() {
            return Err(Error::FieldSize {
                expected: curve.len(),
                got: self.len(),
            });
        }
        Ok(())
    }

    /// Trigonometric interpolant of each component.
    pub fn interpolant(&self, curve: &BoundaryCurve) -> [TrigInterpolant; 2] {
        let comp = |l: usize| {
            let s: Vec<f64> = self.values.iter().map(|v| v[l]).collect();
            TrigInterpolant::new(&s, curve.offset())
        };
        [comp(0), comp(1)]
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            values: self.values.iter().map(|v| v * factor).collect(),
        }
    }
}

/// Nodal samples of a matrix field on the curve.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryMatrixField {
    values: Vec<Matrix2<f64>>,
}

impl BoundaryMatrixField {
    pub fn new(curve: &BoundaryCurve, values: Vec<Matrix2<f64>>) -> Result<Self> {
        if values.len() != curve.len() {
            return Err(Error::FieldSize {
                expected: curve.len(),
                got: values.len(),
            });
        }
        Ok(Self { values })
    }

    pub fn from_fn(curve: &BoundaryCurve, f: impl Fn(&CurvePoint) -> Matrix2<f64>) -> Self {
        Self {
            values: curve.points().iter().map(f).collect(),
        }
    }

    /// Unchecked; sizes are verified when the field meets a curve.
    pub fn from_values(values: Vec<Matrix2<f64>>) -> Self {
        Self { values }
    }

    pub fn constant(curve: &BoundaryCurve, m: Matrix2<f64>) -> Self {
        Self {
            values: vec![m; curve.len()],
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[Matrix2<f64>] {
        &self.values
    }

    pub fn get(&self, i: usize) -> Matrix2<f64> {
        self.values[i]
    }

    pub fn check(&self, curve: &BoundaryCurve) -> Result<()> {
        if self.len() != curve.len() {
            return Err(Error::FieldSize {
                expected: curve.len(),
                got: self.len(),
            });
        }
        Ok(())
    }
}

/// `\int f dsigma` by the periodic trapezoid rule.
pub fn boundary_integral(field: &BoundaryVectorField, curve: &BoundaryCurve) -> Result<Vector2<f64>> {
    field.check(curve)?;
    Ok(field
        .values
        .iter()
        .enumerate()
        .map(|(j, v)| v * curve.weight(j))
        .sum())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OperatorKind {
    SingleLayer,
    WStar,
}

/// Assembled `2N x 2N` operator with assembly metadata.
#[derive(Clone, Debug)]
pub struct DenseBoundaryOperator {
    pub matrix: DMatrix<f64>,
    pub kind: OperatorKind,
    /// Quadrature rules applied to the kernel parts, in order.
    pub rules: &'static [&'static str],
    pub plan_tol: f64,
}

impl DenseBoundaryOperator {
    pub fn apply(&self, field: &BoundaryVectorField) -> Result<BoundaryVectorField> {
        if 2 * field.len() != self.matrix.ncols() {
            return Err(Error::FieldSize {
                expected: self.matrix.ncols() / 2,
                got: field.len(),
            });
        }
        Ok(BoundaryVectorField::from_flat(&(&self.matrix * field.to_flat())))
    }

    pub fn nodes(&self) -> usize {
        self.matrix.nrows() / 2
    }
}

const SINGLE_LAYER_RULES: &[&str] = &["kress-log", "trapezoid-smooth", "trapezoid-regular-part"];
const WSTAR_RULES: &[&str] = &["trapezoid-smooth", "conjugate-function", "trapezoid-regular-part"];

/// A collocation point on the curve.
#[derive(Clone, Copy, Debug)]
struct Target {
    geom: CurvePoint,
    node: Option<usize>,
}

/// Per-source quadrature weights for one target.
struct RowWeights {
    log: Vec<f64>,
    hilbert: Vec<f64>,
}

fn check_cell(curve: &BoundaryCurve, kernel: &PeriodicLame) -> Result<()> {
    if curve.cell() != kernel.cell() {
        return Err(Error::Assembly(
            "curve and kernel were built for different cells".into(),
        ));
    }
    Ok(())
}

/// Shared machinery for rows of `V` and `W*`.
struct RowAssembler<'a> {
    curve: &'a BoundaryCurve,
    kernel: &'a PeriodicLame,
    log_table: Vec<f64>,
    hilbert_table: Vec<f64>,
}

impl<'a> RowAssembler<'a> {
    fn new(curve: &'a BoundaryCurve, kernel: &'a PeriodicLame) -> Result<Self> {
        check_cell(curve, kernel)?;
        let n = curve.len();
        Ok(Self {
            curve,
            kernel,
            log_table: log_weights(n),
            hilbert_table: hilbert_weights(n),
        })
    }

    fn node_target(&self, i: usize) -> Target {
        Target {
            geom: *self.curve.point(i),
            node: Some(i),
        }
    }

    fn param_target(&self, t: f64) -> Target {
        Target {
            geom: self.curve.at(t),
            node: None,
        }
    }

    fn weights(&self, target: &Target) -> RowWeights {
        let n = self.curve.len();
        match target.node {
            Some(i) => RowWeights {
                log: (0..n).map(|j| self.log_table[(i + n - j) % n]).collect(),
                hilbert: (0..n).map(|j| self.hilbert_table[(i + n - j) % n]).collect(),
            },
            None => {
                let thetas: Vec<f64> = (0..n).map(|j| target.geom.t - self.curve.point(j).t).collect();
                RowWeights {
                    log: thetas.iter().map(|&th| log_weight(n, th)).collect(),
                    hilbert: thetas.iter().map(|&th| hilbert_weight(n, th)).collect(),
                }
            }
        }
    }

    fn coincident(target: &Target, src: &CurvePoint, j: usize) -> bool {
        match target.node {
            Some(i) => i == j,
            None => (0.5 * (target.geom.t - src.t)).sin().abs() < COINCIDENT,
        }
    }

    /// Blocks `(V_ij, W*_ij)` of one target row; either may be skipped.
    fn row(&self, target: &Target, want_v: bool, want_w: bool) -> Result<(Vec<Matrix2<f64>>, Vec<Matrix2<f64>>)> {
        let n = self.curve.len();
        let env = self.kernel.env();
        let a_coef = env.diag_coef();
        let beta = env.beta();
        let omega = env.omega();
        let (ca, cb) = traction_constants(env);
        let h = self.curve.step();
        let w = self.weights(target);
        let x = target.geom.point;
        let nu = target.geom.normal;
        let mut vrow = Vec::with_capacity(if want_v { n } else { 0 });
        let mut wrow = Vec::with_capacity(if want_w { n } else { 0 });
        for j in 0..n {
            let src = self.curve.point(j);
            let sp = src.speed;
            let d = x - src.point;
            let theta = target.geom.t - src.t;
            let on_node = Self::coincident(target, src, j);
            let (reg, reg_grad) = if want_w {
                let (v, g) = self.kernel.regular_part_with_grad(&d)?;
                (v, Some(g))
            } else {
                (self.kernel.regular_part(&d)?, None)
            };

            if want_v {
                let (smooth_log, dd) = if on_node {
                    let tau = src.tangent;
                    (sp.ln(), tau * tau.transpose() / (sp * sp))
                } else {
                    let r2 = d.norm_squared();
                    (0.5 * r2.ln() - 0.5 * log_sin2(theta), d * d.transpose() / r2)
                };
                if !smooth_log.is_finite() {
                    return Err(Error::Assembly(format!(
                        "log-part extraction failed between target t={} and node {j}",
                        target.geom.t
                    )));
                }
                let diag = a_coef / TAU * (0.5 * w.log[j] + h * smooth_log) * sp;
                let block = Matrix2::identity() * diag + (reg - dd * (beta / (4.0 * PI))) * (h * sp);
                vrow.push(block);
            }

            if let Some(g) = reg_grad {
                let smooth = if on_node {
                    wstar_smooth_limit(src, &nu, ca, cb)
                } else {
                    wstar_smooth(&d, &nu, sp, theta, ca, cb)
                };
                let cauchy = SKEW * (ca * (-PI) * w.hilbert[j]);
                let regular = traction_from_grad(&g, &nu, omega) * sp;
                wrow.push(smooth * h + cauchy + regular * h);
            }
        }
        Ok((vrow, wrow))
    }
}

/// Smooth part of the free `W*` kernel (times source speed) off the diagonal.
fn wstar_smooth(d: &Vector2<f64>, nu: &Vector2<f64>, sp: f64, theta: f64, ca: f64, cb: f64) -> Matrix2<f64> {
    let r2 = d.norm_squared();
    let dn = d.dot(nu);
    let cross = d[0] * nu[1] - d[1] * nu[0];
    let sym = (Matrix2::identity() * (ca * dn / r2) + d * d.transpose() * (cb * dn / (r2 * r2))) * sp;
    // 1/2 cot((t - s)/2) = -1/2 cot(theta/2)
    let cauchy_free = cross * sp / r2 + 0.5 / (0.5 * theta).tan();
    sym + SKEW * (ca * cauchy_free)
}

/// Diagonal limit of [`wstar_smooth`].
fn wstar_smooth_limit(p: &CurvePoint, nu: &Vector2<f64>, ca: f64, cb: f64) -> Matrix2<f64> {
    let sp = p.speed;
    let tau = p.tangent;
    let curv = p.accel.dot(nu);
    Matrix2::identity() * (-ca * curv / (2.0 * sp))
        - tau * tau.transpose() * (cb * curv / (2.0 * sp * sp * sp))
        + SKEW * (ca * tau.dot(&p.accel) / (2.0 * sp * sp))
}

fn rows_to_matrix(rows: Vec<Vec<Matrix2<f64>>>) -> DMatrix<f64> {
    let n = rows.len();
    let ncols = rows.first().map_or(0, |r| r.len());
    let mut m = DMatrix::zeros(2 * n, 2 * ncols);
    for (i, row) in rows.iter().enumerate() {
        for (j, b) in row.iter().enumerate() {
            m.fixed_view_mut::<2, 2>(2 * i, 2 * j).copy_from(b);
        }
    }
    m
}

/// Both operators of one discretization.
#[derive(Clone, Debug)]
pub struct BoundaryOperators {
    pub single_layer: DenseBoundaryOperator,
    pub wstar: DenseBoundaryOperator,
}

/// Assembles `V` and `W*` in one pass over the node pairs.
pub fn assemble_operators(curve: &BoundaryCurve, kernel: &PeriodicLame) -> Result<BoundaryOperators> {
    let asm = RowAssembler::new(curve, kernel)?;
    let mut vrows = Vec::with_capacity(curve.len());
    let mut wrows = Vec::with_capacity(curve.len());
    for i in 0..curve.len() {
        let (v, w) = asm.row(&asm.node_target(i), true, true)?;
        vrows.push(v);
        wrows.push(w);
    }
    check_wstar_split(curve, kernel)?;
    let tol = kernel.plan().tol;
    Ok(BoundaryOperators {
        single_layer: DenseBoundaryOperator {
            matrix: rows_to_matrix(vrows),
            kind: OperatorKind::SingleLayer,
            rules: SINGLE_LAYER_RULES,
            plan_tol: tol,
        },
        wstar: DenseBoundaryOperator {
            matrix: rows_to_matrix(wrows),
            kind: OperatorKind::WStar,
            rules: WSTAR_RULES,
            plan_tol: tol,
        },
    })
}

/// Nodal single-layer operator `mu -> v_q[omega, mu]` on the curve.
pub fn assemble_single_layer(curve: &BoundaryCurve, kernel: &PeriodicLame) -> Result<DenseBoundaryOperator> {
    let asm = RowAssembler::new(curve, kernel)?;
    let rows = (0..curve.len())
        .map(|i| asm.row(&asm.node_target(i), true, false).map(|r| r.0))
        .collect::<Result<Vec<_>>>()?;
    Ok(DenseBoundaryOperator {
        matrix: rows_to_matrix(rows),
        kind: OperatorKind::SingleLayer,
        rules: SINGLE_LAYER_RULES,
        plan_tol: kernel.plan().tol,
    })
}

/// Nodal traction operator `mu -> W*_q[omega, mu]`.
pub fn assemble_wstar(curve: &BoundaryCurve, kernel: &PeriodicLame) -> Result<DenseBoundaryOperator> {
    let asm = RowAssembler::new(curve, kernel)?;
    let rows = (0..curve.len())
        .map(|i| asm.row(&asm.node_target(i), false, true).map(|r| r.1))
        .collect::<Result<Vec<_>>>()?;
    check_wstar_split(curve, kernel)?;
    Ok(DenseBoundaryOperator {
        matrix: rows_to_matrix(rows),
        kind: OperatorKind::WStar,
        rules: WSTAR_RULES,
        plan_tol: kernel.plan().tol,
    })
}

/// Rows of `V` and `W*` (each `2 x 2N`) for collocation at an arbitrary
/// curve parameter `t`, acting on nodal densities.
pub fn collocation_rows(curve: &BoundaryCurve, kernel: &PeriodicLame, t: f64) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let asm = RowAssembler::new(curve, kernel)?;
    let (v, w) = asm.row(&asm.param_target(t), true, true)?;
    Ok((rows_to_matrix(vec![v]), rows_to_matrix(vec![w])))
}

/// Parts of the `W*` kernel (times the source speed) for target parameter
/// `s` and source parameter `t`.
#[derive(Clone, Copy, Debug)]
pub struct KernelSplit {
    /// Bounded part, integrated by the trapezoid rule.
    pub smooth: Matrix2<f64>,
    /// Coefficient of `ln(4 sin^2((s - t)/2))`; identically zero for the
    /// planar traction kernel.
    pub log: Matrix2<f64>,
    /// `c_a E 1/2 cot((t - s)/2)`.
    pub cauchy: Matrix2<f64>,
    /// Traction of the periodic remainder `R^q`.
    pub regular: Matrix2<f64>,
    /// `(K(d, nu) + T(omega, D R^q(d)) nu) |x'(t)|` evaluated directly.
    pub direct: Matrix2<f64>,
}

impl KernelSplit {
    /// `smooth + log * ln(4 sin^2((s-t)/2)) + cauchy + regular`.
    pub fn recombined(&self, s: f64, t: f64) -> Matrix2<f64> {
        self.smooth + self.log * log_sin2(s - t) + self.cauchy + self.regular
    }
}

pub fn wstar_kernel_split(curve: &BoundaryCurve, kernel: &PeriodicLame, s: f64, t: f64) -> Result<KernelSplit> {
    check_cell(curve, kernel)?;
    let env = kernel.env();
    let (ca, cb) = traction_constants(env);
    let target = curve.at(s);
    let src = curve.at(t);
    let d = target.point - src.point;
    let theta = s - t;
    let nu = target.normal;
    let g = kernel.regular_part_grad(&d)?;
    let regular = traction_from_grad(&g, &nu, env.omega()) * src.speed;
    let smooth = if (0.5 * theta).sin().abs() < COINCIDENT {
        wstar_smooth_limit(&src, &nu, ca, cb)
    } else {
        wstar_smooth(&d, &nu, src.speed, theta, ca, cb)
    };
    let cauchy = SKEW * (ca * 0.5 / (-0.5 * theta).tan());
    let direct = (traction_kernel2(&d, &nu, env) * src.speed) + regular;
    Ok(KernelSplit {
        smooth,
        log: Matrix2::zeros(),
        cauchy,
        regular,
        direct,
    })
}

/// Spot-checks the `W*` kernel split against direct evaluation at a few
/// well-separated node pairs.
fn check_wstar_split(curve: &BoundaryCurve, kernel: &PeriodicLame) -> Result<()> {
    let n = curve.len();
    for (i, j) in [(0, n / 2), (n / 4, 3 * n / 4 + 1), (1, n / 3)] {
        let s = curve.point(i).t;
        let t = curve.point(j).t;
        let split = wstar_kernel_split(curve, kernel, s, t)?;
        let err = (split.recombined(s, t) - split.direct).amax();
        if !(err <= 1e-10 * (1.0 + split.direct.amax())) {
            return Err(Error::Assembly(format!(
                "W* kernel split residual {err:e} at nodes ({i}, {j})"
            )));
        }
    }
    Ok(())
}

/// Scalar single-layer operator of the zero-mean periodic harmonic kernel
/// `S^q`, assembled with the same rules as `V` (used as a decoupled check).
pub fn assemble_scalar_single_layer(curve: &BoundaryCurve, kernel: &PeriodicLame) -> Result<DMatrix<f64>> {
    check_cell(curve, kernel)?;
    let n = curve.len();
    let logw = log_weights(n);
    let h = curve.step();
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        let x = curve.point(i);
        for j in 0..n {
            let src = curve.point(j);
            let d = x.point - src.point;
            let smooth_log = if i == j {
                src.speed.ln()
            } else {
                0.5 * d.norm_squared().ln() - 0.5 * log_sin2(x.t - src.t)
            };
            let reg = kernel.harmonic_regular(&d)?;
            m[(i, j)] = (0.5 * logw[(i + n - j) % n] + h * smooth_log) * src.speed / TAU + h * src.speed * reg;
        }
    }
    Ok(m)
}

/// Result of an off-boundary evaluation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FieldSample<T> {
    pub value: T,
    /// Set when the point is within [`NEAR_BOUNDARY_SPACINGS`] node spacings
    /// of the boundary, where accuracy may degrade.
    pub near_boundary: bool,
}

/// Upsampled copy of the curve and density for near targets.
#[derive(Debug)]
struct Refined {
    points: Vec<Point>,
    weights: Vec<f64>,
    values: Vec<Vector2<f64>>,
}

/// Evaluates the single-layer potential of a fixed density away from the
/// boundary. Sources are upsampled by trigonometric interpolation when the
/// target is close enough for the plain trapezoid rule to lose accuracy.
#[derive(Debug)]
pub struct PotentialEvaluator<'a> {
    curve: &'a BoundaryCurve,
    kernel: &'a PeriodicLame,
    interp: [TrigInterpolant; 2],
    field: BoundaryVectorField,
    cache: Mutex<HashMap<usize, Arc<Refined>>>,
}

impl<'a> PotentialEvaluator<'a> {
    pub fn new(curve: &'a BoundaryCurve, kernel: &'a PeriodicLame, field: &BoundaryVectorField) -> Result<Self> {
        field.check(curve)?;
        check_cell(curve, kernel)?;
        Ok(Self {
            curve,
            kernel,
            interp: field.interpolant(curve),
            field: field.clone(),
            cache: Mutex::new(HashMap::new()),
        })
    }

    fn refined(&self, factor: usize) -> Arc<Refined> {
        let mut cache = self.cache.lock().expect("cache poisoned");
        cache
            .entry(factor)
            .or_insert_with(|| {
                let fine = self.curve.refined(factor);
                let values = if factor == 1 {
                    self.field.values().to_vec()
                } else {
                    fine.points()
                        .iter()
                        .map(|p| Vector2::new(self.interp[0].eval(p.t), self.interp[1].eval(p.t)))
                        .collect()
                };
                Arc::new(Refined {
                    points: fine.points().iter().map(|p| p.point).collect(),
                    weights: fine.weights(),
                    values,
                })
            })
            .clone()
    }

    /// Upsampling factor and near-boundary flag for `x`.
    fn resolution(&self, x: &Point) -> (usize, bool) {
        let spacing = self.curve.max_spacing();
        let dist = self.curve.distance_to(x);
        let near = dist < NEAR_BOUNDARY_SPACINGS * spacing;
        let factor = if dist > 0.0 {
            ((5.6 * spacing / dist).ceil() as usize).clamp(1, MAX_UPSAMPLING)
        } else {
            MAX_UPSAMPLING
        };
        (factor, near)
    }

    /// `v_q[omega, mu](x)`.
    pub fn single_layer(&self, x: &Point) -> Result<FieldSample<Vector2<f64>>> {
        let (factor, near) = self.resolution(x);
        let r = self.refined(factor);
        let mut acc = Vector2::zeros();
        for ((y, w), m) in r.points.iter().zip(&r.weights).zip(&r.values) {
            acc += self.kernel.green(&(x - y))? * m * *w;
        }
        Ok(FieldSample {
            value: acc,
            near_boundary: near,
        })
    }

    /// `D v_q[omega, mu](x)` as `grad[k] = d_k v`.
    pub fn single_layer_grad(&self, x: &Point) -> Result<FieldSample<[Vector2<f64>; 2]>> {
        let (factor, near) = self.resolution(x);
        let r = self.refined(factor);
        let mut acc = [Vector2::zeros(); 2];
        for ((y, w), m) in r.points.iter().zip(&r.weights).zip(&r.values) {
            let g = self.kernel.green_grad(&(x - y))?;
            acc[0] += g[0] * m * *w;
            acc[1] += g[1] * m * *w;
        }
        Ok(FieldSample {
            value: acc,
            near_boundary: near,
        })
    }

    /// `T(omega, D v_q[omega, mu](x)) nu`.
    pub fn traction(&self, x: &Point, nu: &Vector2<f64>) -> Result<FieldSample<Vector2<f64>>> {
        let g = self.single_layer_grad(x)?;
        // (D v)_{ab} = d_b v_a
        let jac = Matrix2::new(g.value[0][0], g.value[1][0], g.value[0][1], g.value[1][1]);
        Ok(FieldSample {
            value: crate::kernels::traction_map2(self.kernel.env().omega(), &jac) * nu,
            near_boundary: g.near_boundary,
        })
    }
}

/// One-off evaluation of `v_q[omega, mu](x)`.
pub fn eval_single_layer(
    x: &Point,
    field: &BoundaryVectorField,
    curve: &BoundaryCurve,
    kernel: &PeriodicLame,
) -> Result<FieldSample<Vector2<f64>>> {
    PotentialEvaluator::new(curve, kernel, field)?.single_layer(x)
}

/// One-off evaluation of `T(omega, D v_q[omega, mu](x)) nu`.
pub fn eval_traction_offboundary(
    x: &Point,
    nu: &Vector2<f64>,
    field: &BoundaryVectorField,
    curve: &BoundaryCurve,
    kernel: &PeriodicLame,
) -> Result<FieldSample<Vector2<f64>>> {
    PotentialEvaluator::new(curve, kernel, field)?.traction(x, nu)
}

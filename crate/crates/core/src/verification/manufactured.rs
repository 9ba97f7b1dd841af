//! Exact solutions built from kernel evaluations only.

use nalgebra::{Matrix2, Vector2};

use crate::error::Result;
use crate::geometry::{BoundaryCurve, PeriodicityCell, Point, ShapeSpec};
use crate::kernels::{traction_from_grad, traction_map2, PeriodicLame};
use crate::nonlinear::TractionModel;
use crate::operators::{BoundaryMatrixField, BoundaryVectorField};
use crate::robin::{drift_gradient, RobinData};

/// Hole shapes of the test matrix, placed at the cell centre and scaled by
/// the shortest edge.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ShapeKind {
    Circle,
    Ellipse,
    PerturbedCircle,
}

impl ShapeKind {
    pub const ALL: [ShapeKind; 3] = [ShapeKind::Circle, ShapeKind::Ellipse, ShapeKind::PerturbedCircle];

    pub fn name(self) -> &'static str {
        match self {
            ShapeKind::Circle => "circle",
            ShapeKind::Ellipse => "ellipse",
            ShapeKind::PerturbedCircle => "perturbed-circle",
        }
    }

    pub fn spec(self, cell: &PeriodicityCell) -> ShapeSpec {
        let c = cell.center();
        let s = cell.min_edge();
        match self {
            ShapeKind::Circle => ShapeSpec::Circle {
                center: [c[0], c[1]],
                radius: 0.25 * s,
            },
            ShapeKind::Ellipse => ShapeSpec::Ellipse {
                center: [c[0], c[1]],
                semi_axes: [0.3 * s, 0.2 * s],
                rotation: 0.3,
            },
            ShapeKind::PerturbedCircle => ShapeSpec::perturbed_circle([c[0], c[1]], 0.25 * s, 0.1, 3),
        }
    }

    /// Radius of a disc about the centre that stays inside the hole.
    pub fn inner_radius(self, cell: &PeriodicityCell) -> f64 {
        let s = cell.min_edge();
        match self {
            ShapeKind::Circle => 0.25 * s,
            ShapeKind::Ellipse => 0.2 * s,
            ShapeKind::PerturbedCircle => 0.225 * s,
        }
    }
}

/// `u*(x) = [Gamma^q(x - x0) - Gamma^q(x - x1)] d + c + B q^{-1} x`.
///
/// The two unit sources cancel each other's `-1/|Q|` background, so `u*`
/// solves the homogeneous Lamé system outside the holes and is
/// quasi-periodic with drift `B`.
#[derive(Clone, Debug)]
pub struct DifferenceOfSources {
    pub x0: Point,
    pub x1: Point,
    pub d: Vector2<f64>,
    pub c: Vector2<f64>,
    pub drift: Matrix2<f64>,
}

impl DifferenceOfSources {
    /// Sources at 0.76 of the inner radius, where the N = 64 error is still
    /// visible but N = 128 resolves the solution.
    pub fn standard(shape: ShapeKind, cell: &PeriodicityCell) -> Self {
        let c = cell.center();
        let rho = 0.76 * shape.inner_radius(cell);
        Self {
            x0: c + Vector2::new(rho, 0.0),
            x1: c + Vector2::new(-0.6 * rho, 0.8 * rho),
            d: Vector2::new(1.0, 1.0),
            c: Vector2::zeros(),
            drift: Matrix2::zeros(),
        }
    }

    pub fn with_constant(mut self, c: Vector2<f64>) -> Self {
        self.c = c;
        self
    }

    pub fn with_drift(mut self, drift: Matrix2<f64>) -> Self {
        self.drift = drift;
        self
    }

    fn drift_grad(&self, kernel: &PeriodicLame) -> Matrix2<f64> {
        let q = kernel.cell().edges();
        self.drift * Matrix2::new(1.0 / q[0], 0.0, 0.0, 1.0 / q[1])
    }

    pub fn value(&self, kernel: &PeriodicLame, x: &Point) -> Result<Vector2<f64>> {
        let g = kernel.green(&(x - self.x0))? - kernel.green(&(x - self.x1))?;
        Ok(g * self.d + self.c + self.drift_grad(kernel) * x)
    }

    /// `T(omega, D u*(x)) nu`.
    pub fn traction(&self, kernel: &PeriodicLame, x: &Point, nu: &Vector2<f64>) -> Result<Vector2<f64>> {
        let g0 = kernel.green_grad(&(x - self.x0))?;
        let g1 = kernel.green_grad(&(x - self.x1))?;
        let omega = kernel.env().omega();
        let g = [g0[0] - g1[0], g0[1] - g1[1]];
        Ok(traction_from_grad(&g, nu, omega) * self.d + traction_map2(omega, &self.drift_grad(kernel)) * nu)
    }

    pub fn boundary_values(&self, curve: &BoundaryCurve, kernel: &PeriodicLame) -> Result<BoundaryVectorField> {
        let v = curve
            .points()
            .iter()
            .map(|p| self.value(kernel, &p.point))
            .collect::<Result<Vec<_>>>()?;
        BoundaryVectorField::new(curve, v)
    }

    pub fn boundary_traction(&self, curve: &BoundaryCurve, kernel: &PeriodicLame) -> Result<BoundaryVectorField> {
        let v = curve
            .points()
            .iter()
            .map(|p| self.traction(kernel, &p.point, &p.normal))
            .collect::<Result<Vec<_>>>()?;
        BoundaryVectorField::new(curve, v)
    }

    /// Robin data `g = a T(omega, Du*) nu + b u*` for the given coefficients.
    pub fn robin_data(
        &self,
        a: BoundaryMatrixField,
        b: BoundaryMatrixField,
        curve: &BoundaryCurve,
        kernel: &PeriodicLame,
    ) -> Result<RobinData> {
        let u = self.boundary_values(curve, kernel)?;
        let t = self.boundary_traction(curve, kernel)?;
        let g = (0..curve.len()).map(|i| a.get(i) * t.get(i) + b.get(i) * u.get(i)).collect();
        Ok(RobinData {
            a,
            b,
            g: BoundaryVectorField::new(curve, g)?,
            drift: self.drift,
        })
    }

    /// `G(x, u) = T(omega, Du*) nu + Lambda (u - u*(x))`.
    pub fn affine_model(&self, lambda: Matrix2<f64>, curve: &BoundaryCurve, kernel: &PeriodicLame) -> Result<TractionModel> {
        let u = self.boundary_values(curve, kernel)?;
        let t = self.boundary_traction(curve, kernel)?;
        let h = (0..curve.len()).map(|i| t.get(i) - lambda * u.get(i)).collect();
        Ok(TractionModel::Affine {
            m: BoundaryMatrixField::constant(curve, lambda),
            h: BoundaryVectorField::new(curve, h)?,
        })
    }

    /// `G(x, u) = T(omega, Du*) nu + kappa [s(u) - s(u*(x))]` with `s(u) = u / (1 + |u|^2)`.
    pub fn saturating_model(&self, kappa: f64, curve: &BoundaryCurve, kernel: &PeriodicLame) -> Result<TractionModel> {
        let u = self.boundary_values(curve, kernel)?;
        let t = self.boundary_traction(curve, kernel)?;
        let s = |v: Vector2<f64>| v / (1.0 + v.norm_squared());
        let h = (0..curve.len()).map(|i| t.get(i) - s(u.get(i)) * kappa).collect();
        Ok(TractionModel::Saturating {
            h: BoundaryVectorField::new(curve, h)?,
            kappa,
        })
    }
}

/// Admissible variable coefficients with `a^{-1} b = -P`, `P` symmetric
/// positive definite.
pub fn variable_coefficients(curve: &BoundaryCurve) -> (BoundaryMatrixField, BoundaryMatrixField) {
    let a_at = |t: f64| Matrix2::new(1.5 + 0.3 * t.cos(), 0.2 * t.sin(), -0.1, 1.2);
    let p_at = |t: f64| Matrix2::new(1.0 + 0.5 * t.cos(), 0.2, 0.2, 0.8 + 0.3 * (2.0 * t).sin());
    let a = BoundaryMatrixField::from_fn(curve, |p| a_at(p.t));
    let b = BoundaryMatrixField::from_fn(curve, |p| -(a_at(p.t) * p_at(p.t)));
    (a, b)
}

/// Data with exact solution `u = B q^{-1} x` for `a = I`, `b = -I`.
pub fn linear_field_data(drift: Matrix2<f64>, curve: &BoundaryCurve, omega: f64) -> RobinData {
    let bq = drift_gradient(&drift, curve);
    let tb = traction_map2(omega, &bq);
    RobinData {
        a: BoundaryMatrixField::constant(curve, Matrix2::identity()),
        b: BoundaryMatrixField::constant(curve, -Matrix2::identity()),
        g: BoundaryVectorField::from_fn(curve, |p| tb * p.normal - bq * p.point),
        drift,
    }
}

/// Data with exact solution `u = c*` for `a = I`, `b = -I`.
pub fn constant_solution_data(cstar: Vector2<f64>, curve: &BoundaryCurve) -> RobinData {
    RobinData {
        a: BoundaryMatrixField::constant(curve, Matrix2::identity()),
        b: BoundaryMatrixField::constant(curve, -Matrix2::identity()),
        g: BoundaryVectorField::constant(curve, -cstar),
        drift: Matrix2::zeros(),
    }
}

/// Deterministic exterior test points at least `margin` from every hole image.
pub fn exterior_points(curve: &BoundaryCurve, count: usize, margin: f64, seed: u64) -> Vec<Point> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let q = curve.cell().edges();
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let x = Point::new(rng.random::<f64>() * q[0], rng.random::<f64>() * q[1]);
        if !curve.in_hole(&x) && curve.distance_to(&x) > margin {
            out.push(x);
        }
    }
    out
}

/// Random trigonometric polynomial density of degree 4.
pub fn random_trig_density(curve: &BoundaryCurve, seed: u64) -> BoundaryVectorField {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let coef: Vec<[f64; 9]> = (0..2)
        .map(|_| std::array::from_fn(|_| rng.random_range(-1.0..1.0)))
        .collect();
    BoundaryVectorField::from_fn(curve, |p| {
        let eval = |c: &[f64; 9]| {
            (1..=4).fold(c[0], |s, m| {
                let (sn, cs) = (m as f64 * p.t).sin_cos();
                s + c[2 * m - 1] * cs + c[2 * m] * sn
            })
        };
        Vector2::new(eval(&coef[0]), eval(&coef[1]))
    })
}

#![allow(dead_code)]

use nalgebra::{Matrix2, Vector2};
use perilame::kernels::{traction_from_grad, traction_map2};
use perilame::operators::{BoundaryMatrixField, BoundaryVectorField};
use perilame::robin::RobinData;
use perilame::{BoundaryCurve, LameEnv, PeriodicLame, PeriodicityCell, Point, ShapeSpec};

pub fn circle() -> ShapeSpec {
    ShapeSpec::Circle {
        center: [0.5, 0.5],
        radius: 0.25,
    }
}

pub fn ellipse() -> ShapeSpec {
    ShapeSpec::Ellipse {
        center: [0.5, 0.5],
        semi_axes: [0.3, 0.2],
        rotation: 0.3,
    }
}

pub fn curve(shape: &ShapeSpec, n: usize) -> BoundaryCurve {
    BoundaryCurve::discretize(shape, n, &PeriodicityCell::unit()).unwrap()
}

pub fn kernel(omega: f64, tol: f64) -> PeriodicLame {
    PeriodicLame::with_tol(LameEnv::planar(omega).unwrap(), PeriodicityCell::unit(), tol).unwrap()
}

/// `u*(x) = [Gamma^q(x - x0) - Gamma^q(x - x1)] d` with both sources inside the hole.
/// The defaults sit at distance 0.19 from the centre of [`circle`], close enough to the
/// boundary that the Nystrom error is visible at N = 64.
pub struct Sources {
    pub x0: Point,
    pub x1: Point,
    pub d: Vector2<f64>,
}

impl Default for Sources {
    fn default() -> Self {
        Self {
            x0: Point::new(0.69, 0.5),
            x1: Point::new(0.386, 0.652),
            d: Vector2::new(1.0, 1.0),
        }
    }
}

impl Sources {
    pub fn value(&self, k: &PeriodicLame, x: &Point) -> Vector2<f64> {
        (k.green(&(x - self.x0)).unwrap() - k.green(&(x - self.x1)).unwrap()) * self.d
    }

    pub fn traction(&self, k: &PeriodicLame, x: &Point, nu: &Vector2<f64>) -> Vector2<f64> {
        let g0 = k.green_grad(&(x - self.x0)).unwrap();
        let g1 = k.green_grad(&(x - self.x1)).unwrap();
        let g = [g0[0] - g1[0], g0[1] - g1[1]];
        traction_from_grad(&g, nu, k.env().omega()) * self.d
    }
}

/// Variable admissible coefficients: `a^{-1} b = -P` with `P` symmetric positive definite.
pub fn variable_coefficients(curve: &BoundaryCurve) -> (BoundaryMatrixField, BoundaryMatrixField) {
    let a = BoundaryMatrixField::from_fn(curve, |p| {
        Matrix2::new(1.5 + 0.3 * p.t.cos(), 0.2 * p.t.sin(), -0.1, 1.2)
    });
    let b = BoundaryMatrixField::from_fn(curve, |p| {
        let pm = Matrix2::new(1.0 + 0.5 * p.t.cos(), 0.2, 0.2, 0.8 + 0.3 * (2.0 * p.t).sin());
        let am = Matrix2::new(1.5 + 0.3 * p.t.cos(), 0.2 * p.t.sin(), -0.1, 1.2);
        -(am * pm)
    });
    (a, b)
}

/// Robin data whose exact solution is `u* + c + B q^{-1} x`.
pub fn manufactured_data(
    curve: &BoundaryCurve,
    k: &PeriodicLame,
    src: &Sources,
    c: Vector2<f64>,
    drift: Matrix2<f64>,
) -> RobinData {
    let (a, b) = variable_coefficients(curve);
    let grad = drift; // unit cell: B q^{-1} = B
    let values = (0..curve.len())
        .map(|i| {
            let p = curve.point(i);
            let u = src.value(k, &p.point) + c + grad * p.point;
            let t = src.traction(k, &p.point, &p.normal) + traction_map2(k.env().omega(), &grad) * p.normal;
            a.get(i) * t + b.get(i) * u
        })
        .collect();
    let g = BoundaryVectorField::new(curve, values).unwrap();
    RobinData { a, b, g, drift }
}

/// Points of the unit cell at least `margin` away from the hole.
pub fn exterior_points(curve: &BoundaryCurve, count: usize, margin: f64, seed: u64) -> Vec<Point> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    while out.len() < count {
        let x = Point::new(rng.random::<f64>(), rng.random::<f64>());
        if !curve.in_hole(&x) && curve.distance_to(&x) > margin {
            out.push(x);
        }
    }
    out
}

/// Random trigonometric density of degree <= 4 on the curve, optionally with zero mean.
pub fn random_trig_density(curve: &BoundaryCurve, seed: u64, zero_mean: bool) -> BoundaryVectorField {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut coef = [[0.0; 9]; 2];
    for c in coef.iter_mut() {
        for v in c.iter_mut() {
            *v = rng.random_range(-1.0..1.0);
        }
    }
    let field = BoundaryVectorField::from_fn(curve, |p| {
        let eval = |c: &[f64; 9]| {
            let mut s = c[0];
            for m in 1..=4 {
                s += c[2 * m - 1] * (m as f64 * p.t).cos() + c[2 * m] * (m as f64 * p.t).sin();
            }
            s
        };
        Vector2::new(eval(&coef[0]), eval(&coef[1]))
    });
    if !zero_mean {
        return field;
    }
    let mean = perilame::operators::boundary_integral(&field, curve).unwrap() / curve.perimeter();
    BoundaryVectorField::new(curve, field.values().iter().map(|v| v - mean).collect()).unwrap()
}

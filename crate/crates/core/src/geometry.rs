//! Periodicity cell and hole boundary.
//!
//! The hole boundary is an analytic closed curve given by truncated
//! trigonometric series in the parameter `t in [0, 2pi)`. Curves are always
//! stored counter-clockwise so that `(x2', -x1') / |x'|` is the outward normal
//! of the hole.

use std::f64::consts::TAU;

use nalgebra::Vector2;
use serde::{Deserialize, Serialize};

use crate::error::{CurveError, Error, Result};

pub type Point = Vector2<f64>;

/// Relative containment margin: the curve must stay this fraction of the
/// shortest cell edge away from the cell boundary.
pub const CONTAINMENT_MARGIN: f64 = 0.01;

/// The box `Q = ]0, q11[ x ]0, q22[` whose lattice translates tile the plane.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PeriodicityCell {
    edges: [f64; 2],
    volume: f64,
}

impl PeriodicityCell {
    /// Builds the cell from its edge lengths (the diagonal of `q`).
    pub fn new(edges: &[f64]) -> Result<Self> {
        for (index, &value) in edges.iter().enumerate() {
            if !(value > 0.0 && value.is_finite()) {
                return Err(Error::NonPositiveEdge { index, value });
            }
        }
        if edges.len() != 2 {
            return Err(Error::UnsupportedDimension(edges.len()));
        }
        Ok(Self {
            edges: [edges[0], edges[1]],
            volume: edges[0] * edges[1],
        })
    }

    pub fn unit() -> Self {
        Self::new(&[1.0, 1.0]).unwrap()
    }

    pub fn edges(&self) -> [f64; 2] {
        self.edges
    }

    pub fn edge(&self, l: usize) -> f64 {
        self.edges[l]
    }

    /// `|Q|`
    pub fn volume(&self) -> f64 {
        self.volume
    }

    pub fn min_edge(&self) -> f64 {
        self.edges[0].min(self.edges[1])
    }

    pub fn max_edge(&self) -> f64 {
        self.edges[0].max(self.edges[1])
    }

    pub fn center(&self) -> Point {
        Point::new(0.5 * self.edges[0], 0.5 * self.edges[1])
    }

    /// `q z` for an integer vector `z`.
    pub fn lattice_point(&self, z: [i64; 2]) -> Point {
        Point::new(self.edges[0] * z[0] as f64, self.edges[1] * z[1] as f64)
    }

    /// `q^{-1} x`
    pub fn to_reduced(&self, x: &Point) -> Point {
        Point::new(x[0] / self.edges[0], x[1] / self.edges[1])
    }

    /// Representative `x - qz` with every component in `[-q_ll/2, q_ll/2)`.
    pub fn nearest_image(&self, x: &Point) -> Point {
        let mut y = *x;
        for l in 0..2 {
            let q = self.edges[l];
            y[l] = x[l] - q * (x[l] / q + 0.5).floor();
            // guard against rounding pushing the value onto the excluded edge
            if y[l] >= 0.5 * q {
                y[l] -= q;
            }
        }
        y
    }

    /// Representative `x - qz` with every component in `[0, q_ll)`.
    pub fn wrap_into_cell(&self, x: &Point) -> Point {
        let mut y = *x;
        for l in 0..2 {
            let q = self.edges[l];
            y[l] = x[l] - q * (x[l] / q).floor();
            if y[l] >= q {
                y[l] -= q;
            }
        }
        y
    }
}

/// Scalar truncated trigonometric series
/// `a0 + sum_k (cos[k-1] cos(k t) + sin[k-1] sin(k t))`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrigSeries {
    #[serde(default)]
    pub a0: f64,
    #[serde(default)]
    pub cos: Vec<f64>,
    #[serde(default)]
    pub sin: Vec<f64>,
}

impl TrigSeries {
    pub fn constant(a0: f64) -> Self {
        Self {
            a0,
            ..Self::default()
        }
    }

    pub fn new(a0: f64, cos: Vec<f64>, sin: Vec<f64>) -> Self {
        Self { a0, cos, sin }
    }

    pub fn degree(&self) -> usize {
        self.cos.len().max(self.sin.len())
    }

    pub fn value(&self, t: f64) -> f64 {
        self.eval(t)[0]
    }

    /// Value and the first two derivatives at `t`.
    pub fn eval(&self, t: f64) -> [f64; 3] {
        let mut out = [self.a0, 0.0, 0.0];
        for k in 1..=self.degree() {
            let a = self.cos.get(k - 1).copied().unwrap_or(0.0);
            let b = self.sin.get(k - 1).copied().unwrap_or(0.0);
            let kf = k as f64;
            let (s, c) = (kf * t).sin_cos();
            out[0] += a * c + b * s;
            out[1] += kf * (b * c - a * s);
            out[2] -= kf * kf * (a * c + b * s);
        }
        out
    }

    fn add_mode(&mut self, k: usize, a: f64, b: f64) {
        if k == 0 {
            self.a0 += a;
            return;
        }
        if self.cos.len() < k {
            self.cos.resize(k, 0.0);
        }
        if self.sin.len() < k {
            self.sin.resize(k, 0.0);
        }
        self.cos[k - 1] += a;
        self.sin[k - 1] += b;
    }

    /// The series of `t -> f(-t)`.
    fn reflected(&self) -> Self {
        Self {
            a0: self.a0,
            cos: self.cos.clone(),
            sin: self.sin.iter().map(|b| -b).collect(),
        }
    }
}

/// Hole shape descriptions accepted by [`BoundaryCurve::discretize`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ShapeSpec {
    Circle {
        center: [f64; 2],
        radius: f64,
    },
    Ellipse {
        center: [f64; 2],
        semi_axes: [f64; 2],
        #[serde(default)]
        rotation: f64,
    },
    Trig {
        x: TrigSeries,
        y: TrigSeries,
    },
}

impl ShapeSpec {
    /// Circle of radius `radius (1 + amplitude cos(mode t))` in polar form,
    /// expanded into an exact trigonometric series.
    pub fn perturbed_circle(center: [f64; 2], radius: f64, amplitude: f64, mode: usize) -> Self {
        let mut x = TrigSeries::constant(center[0]);
        let mut y = TrigSeries::constant(center[1]);
        x.add_mode(1, radius, 0.0);
        y.add_mode(1, 0.0, radius);
        let half = 0.5 * radius * amplitude;
        // cos(m t) cos t and cos(m t) sin t as sums of single modes
        x.add_mode(mode + 1, half, 0.0);
        y.add_mode(mode + 1, 0.0, half);
        let low = mode.abs_diff(1);
        x.add_mode(low, half, 0.0);
        // sin((1 - m) t) = -sin((m - 1) t)
        let sign = if mode >= 1 { -1.0 } else { 1.0 };
        y.add_mode(low, 0.0, sign * half);
        ShapeSpec::Trig { x, y }
    }

    fn parametrization(&self) -> Result<TrigCurve> {
        let curve = match *self {
            ShapeSpec::Circle { center, radius } => {
                if !(radius > 0.0) {
                    return Err(CurveError::Degenerate(format!("radius {radius}")).into());
                }
                TrigCurve {
                    x: TrigSeries::new(center[0], vec![radius], vec![0.0]),
                    y: TrigSeries::new(center[1], vec![0.0], vec![radius]),
                }
            }
            ShapeSpec::Ellipse {
                center,
                semi_axes,
                rotation,
            } => {
                let [a, b] = semi_axes;
                if !(a > 0.0 && b > 0.0) {
                    return Err(CurveError::Degenerate(format!("semi-axes ({a}, {b})")).into());
                }
                let (s, c) = rotation.sin_cos();
                TrigCurve {
                    x: TrigSeries::new(center[0], vec![a * c], vec![-b * s]),
                    y: TrigSeries::new(center[1], vec![a * s], vec![b * c]),
                }
            }
            ShapeSpec::Trig { ref x, ref y } => TrigCurve {
                x: x.clone(),
                y: y.clone(),
            },
        };
        Ok(curve)
    }

    fn center_hint(&self) -> Point {
        match self {
            ShapeSpec::Circle { center, .. } | ShapeSpec::Ellipse { center, .. } => {
                Point::new(center[0], center[1])
            }
            ShapeSpec::Trig { x, y } => Point::new(x.a0, y.a0),
        }
    }
}

/// Planar parametrization `t -> (x(t), y(t))`.
#[derive(Clone, Debug, PartialEq)]
pub struct TrigCurve {
    pub x: TrigSeries,
    pub y: TrigSeries,
}

/// Geometry of the curve at one parameter value.
#[derive(Clone, Copy, Debug)]
pub struct CurvePoint {
    pub t: f64,
    pub point: Point,
    /// `x'(t)`
    pub tangent: Vector2<f64>,
    /// `x''(t)`
    pub accel: Vector2<f64>,
    pub speed: f64,
    /// Outward unit normal of the hole.
    pub normal: Vector2<f64>,
}

impl TrigCurve {
    pub fn at(&self, t: f64) -> CurvePoint {
        let [x, dx, ddx] = self.x.eval(t);
        let [y, dy, ddy] = self.y.eval(t);
        let speed = dx.hypot(dy);
        CurvePoint {
            t,
            point: Point::new(x, y),
            tangent: Vector2::new(dx, dy),
            accel: Vector2::new(ddx, ddy),
            speed,
            normal: Vector2::new(dy / speed, -dx / speed),
        }
    }

    fn signed_area(&self, samples: usize) -> f64 {
        let h = TAU / samples as f64;
        (0..samples)
            .map(|i| {
                let p = self.at(i as f64 * h);
                0.5 * (p.point[0] * p.tangent[1] - p.point[1] * p.tangent[0])
            })
            .sum::<f64>()
            * h
    }
}

/// Hole boundary sampled at the uniform nodes `t_i = 2 pi i / N`.
#[derive(Clone, Debug)]
pub struct BoundaryCurve {
    param: TrigCurve,
    cell: PeriodicityCell,
    /// Parameter offset of node 0 (non-zero only for shifted copies).
    offset: f64,
    points: Vec<CurvePoint>,
    center_hint: Point,
}

impl BoundaryCurve {
    /// Samples `shape` at `n_nodes` uniform parameter nodes and checks that
    /// the curve sits strictly inside `cell`.
    pub fn discretize(shape: &ShapeSpec, n_nodes: usize, cell: &PeriodicityCell) -> Result<Self> {
        if n_nodes < 8 || n_nodes % 2 != 0 {
            return Err(CurveError::BadNodeCount(n_nodes).into());
        }
        let mut param = shape.parametrization()?;
        let check_samples = (8 * n_nodes).max(1024);
        let area = param.signed_area(check_samples);
        if area.abs() < 1e-14 {
            return Err(CurveError::Degenerate("zero enclosed area".into()).into());
        }
        if area < 0.0 {
            param = TrigCurve {
                x: param.x.reflected(),
                y: param.y.reflected(),
            };
        }

        let margin = CONTAINMENT_MARGIN * cell.min_edge();
        let mut closest = f64::INFINITY;
        let mut max_speed: f64 = 0.0;
        let samples: Vec<CurvePoint> = (0..check_samples)
            .map(|i| param.at(TAU * i as f64 / check_samples as f64))
            .collect();
        for p in &samples {
            for l in 0..2 {
                closest = closest
                    .min(p.point[l])
                    .min(cell.edge(l) - p.point[l]);
            }
            max_speed = max_speed.max(p.speed);
        }
        if !(closest >= margin) {
            return Err(CurveError::NotContained {
                margin,
                distance: closest,
            }
            .into());
        }
        for p in &samples {
            if !(p.speed > 1e-10 * max_speed) {
                return Err(CurveError::VanishingSpeed(p.t).into());
            }
        }

        let curve = Self::from_param(param, *cell, 0.0, n_nodes, shape.center_hint());
        let tiny = 1e-12 * curve.perimeter();
        for i in 0..n_nodes {
            for j in (i + 1)..n_nodes {
                if (curve.points[i].point - curve.points[j].point).norm() <= tiny {
                    return Err(CurveError::CoincidentNodes(i, j).into());
                }
            }
        }
        Ok(curve)
    }

    fn from_param(
        param: TrigCurve,
        cell: PeriodicityCell,
        offset: f64,
        n_nodes: usize,
        center_hint: Point,
    ) -> Self {
        let points = (0..n_nodes)
            .map(|i| param.at(offset + TAU * i as f64 / n_nodes as f64))
            .collect();
        Self {
            param,
            cell,
            offset,
            points,
            center_hint,
        }
    }

    /// Same curve sampled with `factor` times as many nodes.
    pub fn refined(&self, factor: usize) -> Self {
        Self::from_param(
            self.param.clone(),
            self.cell,
            self.offset,
            self.len() * factor.max(1),
            self.center_hint,
        )
    }

    /// Same curve and nodes, renumbered so that old node `k` becomes node 0.
    pub fn shifted(&self, k: usize) -> Self {
        let n = self.len();
        Self::from_param(
            self.param.clone(),
            self.cell,
            self.offset + TAU * (k % n) as f64 / n as f64,
            n,
            self.center_hint,
        )
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn cell(&self) -> &PeriodicityCell {
        &self.cell
    }

    pub fn parametrization(&self) -> &TrigCurve {
        &self.param
    }

    pub fn center_hint(&self) -> Point {
        self.center_hint
    }

    /// Parameter of node 0.
    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn point(&self, i: usize) -> &CurvePoint {
        &self.points[i]
    }

    pub fn points(&self) -> &[CurvePoint] {
        &self.points
    }

    pub fn node(&self, i: usize) -> Point {
        self.points[i].point
    }

    pub fn normal(&self, i: usize) -> Vector2<f64> {
        self.points[i].normal
    }

    /// Geometry at an arbitrary parameter (measured like the node parameters).
    pub fn at(&self, t: f64) -> CurvePoint {
        self.param.at(t)
    }

    /// Parameter spacing `2 pi / N`.
    pub fn step(&self) -> f64 {
        TAU / self.len() as f64
    }

    /// Trapezoid weight `|x'(t_i)| 2 pi / N` of node `i`.
    pub fn weight(&self, i: usize) -> f64 {
        self.points[i].speed * self.step()
    }

    pub fn weights(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.weight(i)).collect()
    }

    /// Length of the hole boundary.
    pub fn perimeter(&self) -> f64 {
        self.points.iter().map(|p| p.speed).sum::<f64>() * self.step()
    }

    /// Largest arclength distance between consecutive nodes.
    pub fn max_spacing(&self) -> f64 {
        self.points
            .iter()
            .map(|p| p.speed)
            .fold(0.0, f64::max)
            * self.step()
    }

    /// Area `|Omega_Q|` of the hole, `1/2 \oint (x dy - y dx)`.
    pub fn hole_area(&self) -> f64 {
        self.points
            .iter()
            .map(|p| 0.5 * (p.point[0] * p.tangent[1] - p.point[1] * p.tangent[0]))
            .sum::<f64>()
            * self.step()
    }

    /// Distance from `x` to the nearest lattice image of the curve, measured
    /// on a sampling eight times finer than the nodes.
    pub fn distance_to(&self, x: &Point) -> f64 {
        let samples = 8 * self.len();
        (0..samples)
            .map(|i| {
                let p = self.param.at(TAU * i as f64 / samples as f64);
                self.cell.nearest_image(&(x - p.point)).norm()
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// Whether `x` lies in some lattice image of the (open) hole.
    pub fn in_hole(&self, x: &Point) -> bool {
        let y = self.cell.wrap_into_cell(x);
        let samples = 8 * self.len();
        let mut winding = 0.0;
        let mut prev = self.param.at(0.0).point - y;
        for i in 1..=samples {
            let cur = self.param.at(TAU * i as f64 / samples as f64).point - y;
            winding += (prev[0] * cur[1] - prev[1] * cur[0]).atan2(prev.dot(&cur));
            prev = cur;
        }
        (winding / TAU).round() != 0.0
    }
}

/// Convenience wrapper matching the operation name used by the CLI.
pub fn discretize_curve(shape: &ShapeSpec, n_nodes: usize, cell: &PeriodicityCell) -> Result<BoundaryCurve> {
    BoundaryCurve::discretize(shape, n_nodes, cell)
}

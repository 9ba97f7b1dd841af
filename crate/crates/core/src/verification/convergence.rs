//! Error against node count for problems with known solutions.

use crate::error::Result;
use crate::geometry::{BoundaryCurve, PeriodicityCell};
use crate::kernels::{LameEnv, PeriodicLame};
use crate::operators::assemble_operators;
use crate::verification::checks::{constant_solution_error, manufactured_nonlinear_error, manufactured_robin_error};
use crate::verification::manufactured::{DifferenceOfSources, ShapeKind};

/// Errors at or below this are treated as rounding and left out of the fit.
pub const ROUNDING_FLOOR: f64 = 1e-13;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Problem {
    /// Difference of sources with variable admissible coefficients.
    ManufacturedLinear,
    /// `u = c*` with `a = I`, `b = -I`.
    ConstantSolution,
    /// Difference of sources through the affine nonlinear model, chord iteration.
    ManufacturedNonlinear,
}

#[derive(Clone, Copy, Debug)]
pub struct ProblemSpec {
    pub problem: Problem,
    pub cell: [f64; 2],
    pub omega: f64,
    pub shape: ShapeKind,
    pub tol: f64,
    pub seed: u64,
}

impl ProblemSpec {
    pub fn new(problem: Problem) -> Self {
        Self {
            problem,
            cell: [1.0, 1.0],
            omega: 1.0,
            shape: ShapeKind::Circle,
            tol: 1e-12,
            seed: 7,
        }
    }
}

#[derive(Clone, Debug)]
pub struct ConvergenceTable {
    /// `(N, max error at the test points)`.
    pub rows: Vec<(usize, f64)>,
    /// Exponential rate `r` in `error ~ C exp(-r N)`, least squares over
    /// rows above [`ROUNDING_FLOOR`]. NaN with fewer than two such rows.
    pub rate: f64,
}

impl ConvergenceTable {
    /// True when no row is larger than its predecessor by more than `slack`
    /// (absolute), so that rounding-level jitter is tolerated.
    pub fn is_monotone(&self, slack: f64) -> bool {
        self.rows.windows(2).all(|w| w[1].1 <= w[0].1 + slack)
    }
}

pub fn convergence_study(spec: &ProblemSpec, nodes: &[usize]) -> Result<ConvergenceTable> {
    let cell = PeriodicityCell::new(&spec.cell)?;
    let kernel = PeriodicLame::with_tol(LameEnv::planar(spec.omega)?, cell, spec.tol)?;
    let exact = DifferenceOfSources::standard(spec.shape, &cell);
    let mut rows = Vec::with_capacity(nodes.len());
    for &n in nodes {
        let curve = BoundaryCurve::discretize(&spec.shape.spec(&cell), n, &cell)?;
        let ops = assemble_operators(&curve, &kernel)?;
        let err = match spec.problem {
            Problem::ManufacturedLinear => manufactured_robin_error(&exact, &curve, &kernel, &ops, 20, spec.seed)?,
            Problem::ConstantSolution => constant_solution_error(&curve, &kernel, &ops)?,
            Problem::ManufacturedNonlinear => manufactured_nonlinear_error(&exact, &curve, &kernel, &ops, spec.seed)?.0,
        };
        rows.push((n, err));
    }
    let rate = fit_rate(&rows);
    Ok(ConvergenceTable { rows, rate })
}

fn fit_rate(rows: &[(usize, f64)]) -> f64 {
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|(_, e)| *e > ROUNDING_FLOOR)
        .map(|&(n, e)| (n as f64, e.ln()))
        .collect();
    if pts.len() < 2 {
        return f64::NAN;
    }
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let num: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let den: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    -num / den
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rate_of_exact_exponential() {
        let rows: Vec<_> = [16, 32, 48].iter().map(|&n| (n, 3.0 * (-0.25 * n as f64).exp())).collect();
        assert!((fit_rate(&rows) - 0.25).abs() < 1e-12);
    }

    #[test]
    fn floor_rows_are_ignored() {
        assert!(fit_rate(&[(8, 1e-3), (16, 1e-16)]).is_nan());
    }
}

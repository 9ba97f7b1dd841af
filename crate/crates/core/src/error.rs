use thiserror::Error;

use crate::robin::AdmissibilityFailure;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("non-positive edge: cell entry {index} is {value}")]
    NonPositiveEdge { index: usize, value: f64 },

    #[error("unsupported dimension {0}: only n = 2 is discretized")]
    UnsupportedDimension(usize),

    #[error("omega must exceed {bound} for n={dim} (omega in ]1-2/n, +inf[), got {omega}")]
    InadmissibleOmega { dim: usize, omega: f64, bound: f64 },

    #[error("singular argument: kernel evaluated at a lattice point")]
    SingularArgument,

    #[error("invalid curve: {0}")]
    Curve(#[from] CurveError),

    #[error("tolerance unattainable: {tol:e} is below what the lattice sums can certify")]
    ToleranceUnattainable { tol: f64 },

    #[error("lattice tolerance {tol:e} outside the supported range [1e-14, 1e-4]")]
    InvalidTolerance { tol: f64 },

    #[error("assembly error: {0}")]
    Assembly(String),

    #[error("field has {got} nodes but the curve has {expected}")]
    FieldSize { expected: usize, got: usize },

    #[error("inadmissible Robin data: {}", format_failures(.0))]
    Inadmissible(Vec<AdmissibilityFailure>),

    #[error("numerically singular system (condition estimate {condition:e}); the coefficient assumptions are likely violated beyond tolerance")]
    SingularSystem { condition: f64 },

    #[error("rank-deficient Newton system: smallest singular value {sigma_min:e} (largest {sigma_max:e}); the constant c is not determined by the model")]
    RankDeficient { sigma_min: f64, sigma_max: f64 },

    #[error("no convergence after {iterations} iterations (last update {last_update:e}, residual {last_residual:e})")]
    NonConvergence {
        iterations: usize,
        last_update: f64,
        last_residual: f64,
    },

    #[error("point ({0}, {1}) lies inside a hole")]
    InsideHole(f64, f64),

    #[error("representation mismatch {mismatch:e} exceeds tolerance {tol:e}")]
    RepresentationMismatch { mismatch: f64, tol: f64 },

    #[error("oracle failure: {0}")]
    Oracle(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CurveError {
    #[error("node count {0} must be even and at least 8")]
    BadNodeCount(usize),
    #[error("curve leaves the cell or comes within {margin:e} of its boundary (closest distance {distance:e})")]
    NotContained { margin: f64, distance: f64 },
    #[error("vanishing speed at parameter t = {0}")]
    VanishingSpeed(f64),
    #[error("nodes {0} and {1} coincide")]
    CoincidentNodes(usize, usize),
    #[error("degenerate shape: {0}")]
    Degenerate(String),
}

fn format_failures(failures: &[AdmissibilityFailure]) -> String {
    failures
        .iter()
        .map(|f| f.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}

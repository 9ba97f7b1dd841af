//! TOML run configuration.
//!
//! ```toml
//! mode = "solve-linear"        # solve-linear | solve-nonlinear | green-eval | verify
//! cell = [1.0, 1.0]
//! omega = 1.0
//! nodes = 128                  # default 128
//! tol = 1e-10                  # lattice-sum tolerance, default 1e-10
//! drift = [[0.0, 0.0], [0.0, 0.0]]
//!
//! [curve]
//! kind = "circle"
//! center = [0.5, 0.5]
//! radius = 0.25
//!
//! [robin]
//! a = [[1.0, 0.0], [0.0, 1.0]]
//! b = [[-1.0, 0.0], [0.0, -1.0]]
//! g = [0.0, 0.0]
//! ```
//!
//! Matrix and vector entries are either constants or trigonometric series
//! in the curve parameter, e.g. `g = [{ a0 = 1.0, cos = [0.5] }, { sin = [1.0] }]`.

use std::path::{Path, PathBuf};

use nalgebra::{Matrix2, Vector2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{BoundaryCurve, PeriodicityCell, ShapeSpec, TrigSeries};
use crate::kernels::LameEnv;
use crate::nonlinear::{Method, NonlinearOptions, TractionModel};
use crate::operators::{BoundaryMatrixField, BoundaryVectorField};
use crate::robin::RobinData;
use crate::verification::manufactured::ShapeKind;
use crate::verification::suite::SuiteConfig;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    #[default]
    SolveLinear,
    SolveNonlinear,
    GreenEval,
    Verify,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::SolveLinear => "solve-linear",
            Mode::SolveNonlinear => "solve-nonlinear",
            Mode::GreenEval => "green-eval",
            Mode::Verify => "verify",
        }
    }
}

impl std::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [Mode::SolveLinear, Mode::SolveNonlinear, Mode::GreenEval, Mode::Verify]
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown mode `{s}`")))
    }
}

/// A scalar that is either a constant or a series in the curve parameter.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ScalarSpec {
    Constant(f64),
    Series(TrigSeries),
}

impl ScalarSpec {
    pub fn at(&self, t: f64) -> f64 {
        match self {
            ScalarSpec::Constant(v) => *v,
            ScalarSpec::Series(s) => s.value(t),
        }
    }
}

/// Row-major 2x2 matrix of [`ScalarSpec`].
pub type MatrixSpec = [[ScalarSpec; 2]; 2];
pub type VectorSpec = [ScalarSpec; 2];

pub fn matrix_field(spec: &MatrixSpec, curve: &BoundaryCurve) -> BoundaryMatrixField {
    BoundaryMatrixField::from_fn(curve, |p| Matrix2::from_fn(|i, j| spec[i][j].at(p.t)))
}

pub fn vector_field(spec: &VectorSpec, curve: &BoundaryCurve) -> BoundaryVectorField {
    BoundaryVectorField::from_fn(curve, |p| Vector2::new(spec[0].at(p.t), spec[1].at(p.t)))
}

fn constant_matrix(m: [[f64; 2]; 2]) -> MatrixSpec {
    m.map(|row| row.map(ScalarSpec::Constant))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RobinSpec {
    pub a: MatrixSpec,
    pub b: MatrixSpec,
    pub g: VectorSpec,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ModelSpec {
    /// `G(x, u) = M(x) u + h(x)`
    Affine { m: MatrixSpec, h: VectorSpec },
    /// `G(x, u) = h(x) + kappa u / (1 + |u|^2)`
    Saturating { kappa: f64, h: VectorSpec },
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MethodSpec {
    Picard,
    #[default]
    Newton,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NonlinearSpec {
    pub model: ModelSpec,
    #[serde(default)]
    pub method: MethodSpec,
    #[serde(default = "one")]
    pub damping: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    #[serde(default = "default_nl_tol")]
    pub tol: f64,
}

/// Cell-centred `nx` by `ny` sampling of the periodicity cell.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub nx: usize,
    pub ny: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self { nx: 16, ny: 16 }
    }
}

/// Configuration matrix of the property suite.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifySpec {
    pub cells: Vec<[f64; 2]>,
    pub omegas: Vec<f64>,
    pub shapes: Vec<ShapeKind>,
    pub nodes: Vec<usize>,
    pub tol: f64,
}

impl Default for VerifySpec {
    fn default() -> Self {
        let d = SuiteConfig::default();
        Self {
            cells: d.cells,
            omegas: d.omegas,
            shapes: d.shapes,
            nodes: d.nodes,
            tol: d.tol,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub mode: Mode,
    pub cell: [f64; 2],
    pub omega: f64,
    pub curve: ShapeSpec,
    #[serde(default = "default_nodes")]
    pub nodes: usize,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default)]
    pub drift: [[f64; 2]; 2],
    #[serde(default = "default_out_dir")]
    pub out_dir: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub robin: Option<RobinSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nonlinear: Option<NonlinearSpec>,
    #[serde(default)]
    pub grid: GridSpec,
    #[serde(default)]
    pub verify: VerifySpec,
}

fn one() -> f64 {
    1.0
}
fn default_max_iter() -> usize {
    50
}
fn default_nl_tol() -> f64 {
    1e-12
}
fn default_nodes() -> usize {
    128
}
fn default_tol() -> f64 {
    1e-10
}
fn default_seed() -> u64 {
    SuiteConfig::default().seed
}
fn default_out_dir() -> PathBuf {
    PathBuf::from("out")
}

impl Default for RunConfig {
    /// Unit cell, centred circle of radius 0.25, `omega = 1`, `a = I`,
    /// `b = -I`, `g = 0`, `B = 0`.
    fn default() -> Self {
        Self {
            mode: Mode::default(),
            cell: [1.0, 1.0],
            omega: 1.0,
            curve: ShapeSpec::Circle {
                center: [0.5, 0.5],
                radius: 0.25,
            },
            nodes: default_nodes(),
            tol: default_tol(),
            seed: default_seed(),
            drift: [[0.0; 2]; 2],
            out_dir: default_out_dir(),
            robin: Some(RobinSpec {
                a: constant_matrix([[1.0, 0.0], [0.0, 1.0]]),
                b: constant_matrix([[-1.0, 0.0], [0.0, -1.0]]),
                g: [ScalarSpec::Constant(0.0), ScalarSpec::Constant(0.0)],
            }),
            nonlinear: None,
            grid: GridSpec::default(),
            verify: VerifySpec::default(),
        }
    }
}

impl RunConfig {
    pub fn drift_matrix(&self) -> Matrix2<f64> {
        Matrix2::from_fn(|i, j| self.drift[i][j])
    }

    /// Checks everything that does not need a discretization: cell, omega,
    /// node count, tolerances, grid and the sections the mode needs.
    pub fn validate(&self) -> Result<()> {
        PeriodicityCell::new(&self.cell)?;
        LameEnv::planar(self.omega)?;
        if self.nodes < 8 || self.nodes % 2 != 0 {
            return Err(crate::error::CurveError::BadNodeCount(self.nodes).into());
        }
        check_tol(self.tol)?;
        if self.grid.nx == 0 || self.grid.ny == 0 {
            return Err(Error::Config("grid: nx and ny must be positive".into()));
        }
        match self.mode {
            Mode::SolveLinear if self.robin.is_none() => {
                return Err(Error::Config("mode solve-linear needs a [robin] section".into()))
            }
            Mode::SolveNonlinear => {
                let Some(nl) = &self.nonlinear else {
                    return Err(Error::Config("mode solve-nonlinear needs a [nonlinear] section".into()));
                };
                self.nonlinear_options(nl).validate()?;
            }
            Mode::Verify => {
                let v = &self.verify;
                if v.cells.is_empty() || v.omegas.is_empty() || v.shapes.is_empty() || v.nodes.is_empty() {
                    return Err(Error::Config("verify: every list must be non-empty".into()));
                }
                for c in &v.cells {
                    PeriodicityCell::new(c)?;
                }
                for &w in &v.omegas {
                    LameEnv::planar(w)?;
                }
                for &n in &v.nodes {
                    if n < 8 || n % 2 != 0 {
                        return Err(crate::error::CurveError::BadNodeCount(n).into());
                    }
                }
                check_tol(v.tol)?;
            }
            _ => {}
        }
        Ok(())
    }

    pub fn robin_data(&self, curve: &BoundaryCurve) -> Result<RobinData> {
        let spec = self
            .robin
            .as_ref()
            .ok_or_else(|| Error::Config("missing [robin] section".into()))?;
        Ok(RobinData {
            a: matrix_field(&spec.a, curve),
            b: matrix_field(&spec.b, curve),
            g: vector_field(&spec.g, curve),
            drift: self.drift_matrix(),
        })
    }

    pub fn traction_model(&self, curve: &BoundaryCurve) -> Result<TractionModel> {
        let spec = self
            .nonlinear
            .as_ref()
            .ok_or_else(|| Error::Config("missing [nonlinear] section".into()))?;
        Ok(match &spec.model {
            ModelSpec::Affine { m, h } => TractionModel::Affine {
                m: matrix_field(m, curve),
                h: vector_field(h, curve),
            },
            ModelSpec::Saturating { kappa, h } => TractionModel::Saturating {
                h: vector_field(h, curve),
                kappa: *kappa,
            },
        })
    }

    pub fn nonlinear_options(&self, spec: &NonlinearSpec) -> NonlinearOptions {
        NonlinearOptions {
            method: match spec.method {
                MethodSpec::Picard => Method::Picard,
                MethodSpec::Newton => Method::Newton,
            },
            damping: spec.damping,
            max_iter: spec.max_iter,
            tol: spec.tol,
            initial: None,
        }
    }

    pub fn suite_config(&self) -> SuiteConfig {
        SuiteConfig {
            cells: self.verify.cells.clone(),
            omegas: self.verify.omegas.clone(),
            shapes: self.verify.shapes.clone(),
            nodes: self.verify.nodes.clone(),
            tol: self.verify.tol,
            seed: self.seed,
            fault: None,
        }
    }

    /// The resolved configuration as TOML, defaults included.
    pub fn echo(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }
}

fn check_tol(tol: f64) -> Result<()> {
    // same range the lattice planner accepts
    if !(tol > 0.0) || tol < 1e-14 {
        return Err(Error::ToleranceUnattainable { tol });
    }
    if !(tol <= 1e-4) {
        return Err(Error::InvalidTolerance { tol });
    }
    Ok(())
}

/// Parses and validates a configuration string. Schema errors name the
/// offending key path.
pub fn parse_config_str(text: &str) -> Result<RunConfig> {
    let de = toml::Deserializer::parse(text).map_err(|e| Error::Config(e.to_string()))?;
    let config: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner().message().to_string();
        if path == "." || path.is_empty() {
            Error::Config(inner)
        } else {
            Error::Config(format!("{path}: {inner}"))
        }
    })?;
    config.validate()?;
    Ok(config)
}

pub fn parse_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path)?;
    parse_config_str(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
cell = [1.0, 1.0]
omega = 1.0

[curve]
kind = "circle"
center = [0.5, 0.5]
radius = 0.25

[robin]
a = [[1.0, 0.0], [0.0, 1.0]]
b = [[-1.0, 0.0], [0.0, -1.0]]
g = [0.3, -0.7]
"#;

    #[test]
    fn minimal_config_resolves_defaults() {
        let c = parse_config_str(MINIMAL).unwrap();
        assert_eq!(c.nodes, 128);
        assert_eq!(c.tol, 1e-10);
        assert_eq!(c.mode, Mode::SolveLinear);
        assert_eq!(c.drift, [[0.0; 2]; 2]);
    }

    #[test]
    fn echo_round_trips() {
        let c = parse_config_str(MINIMAL).unwrap();
        assert_eq!(parse_config_str(&c.echo()).unwrap(), c);
        let d = RunConfig::default();
        assert_eq!(parse_config_str(&d.echo()).unwrap(), d);
    }

    #[test]
    fn negative_omega_cites_the_bound() {
        let err = parse_config_str(&MINIMAL.replace("omega = 1.0", "omega = -2.0")).unwrap_err();
        assert!(err.to_string().contains("omega must exceed 0 for n=2"), "{err}");
    }

    #[test]
    fn unknown_field_is_named() {
        let err = parse_config_str(&MINIMAL.replace("g = [0.3, -0.7]", "g = [0.3, -0.7]\nbogus = 1")).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("bogus") && msg.contains("robin"), "{msg}");
    }

    #[test]
    fn series_entries_parse() {
        let text = MINIMAL.replace("g = [0.3, -0.7]", "g = [{ a0 = 1.0, cos = [0.5] }, { sin = [1.0] }]");
        let c = parse_config_str(&text).unwrap();
        let g = &c.robin.unwrap().g;
        assert!((g[0].at(0.0) - 1.5).abs() < 1e-15);
        assert!((g[1].at(std::f64::consts::FRAC_PI_2) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn modes_need_their_sections() {
        let text = format!("mode = \"solve-nonlinear\"\n{MINIMAL}");
        assert!(parse_config_str(&text).unwrap_err().to_string().contains("[nonlinear]"));
    }
}

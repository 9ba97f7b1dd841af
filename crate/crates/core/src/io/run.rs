//! Mode pipelines and result serialization.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use nalgebra::{Matrix2, Vector2};

use crate::error::{Error, Result};
use crate::geometry::{BoundaryCurve, PeriodicityCell, Point};
use crate::io::config::{Mode, RunConfig};
use crate::io::write_atomic;
use crate::kernels::{LameEnv, PeriodicLame};
use crate::nonlinear::solve_nonlinear_robin;
use crate::operators::assemble_operators;
use crate::robin::{solve_robin_with, validate_robin_data, SolutionEvaluator, SolutionRep};
use crate::verification::suite::{fingerprint, reports_to_csv, run_property_suite, OracleReport};

pub const EXIT_OK: i32 = 0;
/// Output could not be written.
pub const EXIT_IO: i32 = 1;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_SOLVER: i32 = 3;
pub const EXIT_VERIFICATION: i32 = 4;

/// Exit code for an error raised by a pipeline.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::NonPositiveEdge { .. }
        | Error::UnsupportedDimension(_)
        | Error::InadmissibleOmega { .. }
        | Error::Curve(_)
        | Error::ToleranceUnattainable { .. }
        | Error::InvalidTolerance { .. }
        | Error::FieldSize { .. }
        | Error::Inadmissible(_)
        | Error::Config(_) => EXIT_VALIDATION,
        Error::Io(_) => EXIT_IO,
        _ => EXIT_SOLVER,
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DensityRow {
    pub t: f64,
    pub x: Point,
    pub mu: Vector2<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FieldRow {
    pub x: Point,
    pub u: Vector2<f64>,
    /// Closer to the boundary than the evaluator's accuracy guarantee.
    pub warning: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GreenRow {
    pub x: Point,
    pub g: Matrix2<f64>,
}

/// Everything a run produces. `summary` holds ordered `key=value` pairs.
#[derive(Clone, Debug, Default)]
pub struct ResultBundle {
    pub fingerprint: String,
    pub echo: String,
    pub summary: Vec<(String, String)>,
    pub density: Vec<DensityRow>,
    pub field: Vec<FieldRow>,
    pub green: Vec<GreenRow>,
    pub reports: Vec<OracleReport>,
}

impl ResultBundle {
    pub fn get(&self, key: &str) -> Option<&str> {
        self.summary.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    fn put(&mut self, key: &str, value: impl ToString) {
        self.summary.push((key.to_string(), value.to_string()));
    }
}

#[derive(Debug)]
pub struct RunOutcome {
    pub bundle: Option<ResultBundle>,
    pub exit_code: i32,
    pub error: Option<Error>,
}

fn fmt_vec(v: &Vector2<f64>) -> String {
    format!("[{:e}, {:e}]", v[0], v[1])
}

fn fmt_mat(m: &Matrix2<f64>) -> String {
    format!("[[{:e}, {:e}], [{:e}, {:e}]]", m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)])
}

/// Fingerprint of the resolved configuration, independent of the output directory.
pub fn config_fingerprint(config: &RunConfig) -> String {
    let mut c = config.clone();
    c.out_dir = PathBuf::new();
    fingerprint(&c.echo())
}

struct Setup {
    kernel: PeriodicLame,
    curve: BoundaryCurve,
}

fn setup(config: &RunConfig) -> Result<Setup> {
    config.validate()?;
    let cell = PeriodicityCell::new(&config.cell)?;
    let kernel = PeriodicLame::with_tol(LameEnv::planar(config.omega)?, cell, config.tol)?;
    let curve = BoundaryCurve::discretize(&config.curve, config.nodes, &cell)?;
    Ok(Setup { kernel, curve })
}

/// Runs the configured mode without touching the file system.
pub fn run(config: &RunConfig) -> RunOutcome {
    let mut bundle = ResultBundle {
        fingerprint: config_fingerprint(config),
        echo: config.echo(),
        ..Default::default()
    };
    bundle.put("mode", config.mode.name());
    bundle.put("fingerprint", &bundle.fingerprint.clone());
    let result = match config.mode {
        Mode::SolveLinear | Mode::SolveNonlinear => solve(config, &mut bundle),
        Mode::GreenEval => green_eval(config, &mut bundle),
        Mode::Verify => Ok(verify(config, &mut bundle)),
    };
    match result {
        Ok(code) => RunOutcome {
            bundle: Some(bundle),
            exit_code: code,
            error: None,
        },
        Err(e) => RunOutcome {
            bundle: None,
            exit_code: exit_code(&e),
            error: Some(e),
        },
    }
}

/// [`run`] followed by [`write_bundle`] into `config.out_dir`.
pub fn execute(config: &RunConfig) -> RunOutcome {
    let mut outcome = run(config);
    if let Some(bundle) = &outcome.bundle {
        if let Err(e) = write_bundle(bundle, &config.out_dir) {
            outcome.exit_code = EXIT_IO;
            outcome.error = Some(e);
        }
    }
    outcome
}

fn grid_points(config: &RunConfig) -> Vec<Point> {
    let (nx, ny) = (config.grid.nx, config.grid.ny);
    let mut pts = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            pts.push(Point::new(
                (i as f64 + 0.5) * config.cell[0] / nx as f64,
                (j as f64 + 0.5) * config.cell[1] / ny as f64,
            ));
        }
    }
    pts
}

fn solve(config: &RunConfig, bundle: &mut ResultBundle) -> Result<i32> {
    // every precondition is checked before the first solve
    let Setup { kernel, curve } = setup(config)?;
    let rep: SolutionRep = if config.mode == Mode::SolveLinear {
        let data = config.robin_data(&curve)?;
        let report = validate_robin_data(&data, &curve)?;
        let ops = assemble_operators(&curve, &kernel)?;
        solve_robin_with(&data, &curve, &kernel, &ops, &report)?
    } else {
        let model = config.traction_model(&curve)?;
        let spec = config.nonlinear.as_ref().expect("validated");
        let options = config.nonlinear_options(spec);
        let ops = assemble_operators(&curve, &kernel)?;
        solve_nonlinear_robin(&model, &config.drift_matrix(), &curve, &kernel, &ops, &options)?
    };

    let d = &rep.diagnostics;
    bundle.put("c", fmt_vec(&rep.c));
    bundle.put("B", fmt_mat(&rep.drift));
    bundle.put("mu_sup_norm", format!("{:e}", rep.mu.sup_norm()));
    bundle.put("residual_on_node", format!("{:e}", d.residual_on_node));
    bundle.put("residual_off_node", format!("{:e}", d.residual_off_node));
    bundle.put("condition_estimate", format!("{:e}", d.condition_estimate));
    bundle.put("det_integral_ainv_b", format!("{:e}", d.det_integral_ainv_b));
    if config.mode == Mode::SolveNonlinear {
        bundle.put("iterations", d.iterations);
    }
    bundle.put("lattice_tol_achieved", format!("{:e}", kernel.plan().achieved()));

    bundle.density = curve
        .points()
        .iter()
        .zip(rep.mu.values())
        .map(|(p, mu)| DensityRow {
            t: p.t,
            x: p.point,
            mu: *mu,
        })
        .collect();
    let eval = SolutionEvaluator::new(&rep, &curve, &kernel)?;
    for x in grid_points(config) {
        // masked points are omitted
        if curve.in_hole(&x) {
            continue;
        }
        let s = eval.eval(&x)?;
        bundle.field.push(FieldRow {
            x,
            u: s.value,
            warning: s.near_boundary,
        });
    }
    Ok(EXIT_OK)
}

fn green_eval(config: &RunConfig, bundle: &mut ResultBundle) -> Result<i32> {
    let Setup { kernel, .. } = setup(config)?;
    let plan = kernel.plan();
    bundle.put("lattice_tol_achieved", format!("{:e}", plan.achieved()));
    bundle.put("screening", format!("{:e}", plan.eta));
    bundle.put("real_cutoff", plan.real_cutoff);
    bundle.put("fourier_cutoff", plan.fourier_cutoff);
    for x in grid_points(config) {
        bundle.green.push(GreenRow { x, g: kernel.green(&x)? });
    }
    Ok(EXIT_OK)
}

fn verify(config: &RunConfig, bundle: &mut ResultBundle) -> i32 {
    let reports = run_property_suite(&config.suite_config());
    let failed = reports.iter().filter(|r| !r.pass).count();
    bundle.put("reports", reports.len());
    bundle.put("failed", failed);
    bundle.put("pass", failed == 0);
    bundle.reports = reports;
    if failed == 0 {
        EXIT_OK
    } else {
        EXIT_VERIFICATION
    }
}

pub fn summary_text(bundle: &ResultBundle) -> String {
    bundle.summary.iter().fold(String::new(), |mut s, (k, v)| {
        let _ = writeln!(s, "{k}={v}");
        s
    })
}

pub fn density_csv(rows: &[DensityRow]) -> String {
    let mut s = String::from("t,x1,x2,mu1,mu2\n");
    for r in rows {
        let _ = writeln!(s, "{:e},{:e},{:e},{:e},{:e}", r.t, r.x[0], r.x[1], r.mu[0], r.mu[1]);
    }
    s
}

pub fn field_csv(rows: &[FieldRow]) -> String {
    let mut s = String::from("x1,x2,u1,u2,warning\n");
    for r in rows {
        let _ = writeln!(s, "{:e},{:e},{:e},{:e},{}", r.x[0], r.x[1], r.u[0], r.u[1], u8::from(r.warning));
    }
    s
}

pub fn green_csv(rows: &[GreenRow]) -> String {
    let mut s = String::from("x1,x2,g11,g12,g21,g22\n");
    for r in rows {
        let g = &r.g;
        let _ = writeln!(
            s,
            "{:e},{:e},{:e},{:e},{:e},{:e}",
            r.x[0],
            r.x[1],
            g[(0, 0)],
            g[(0, 1)],
            g[(1, 0)],
            g[(1, 1)]
        );
    }
    s
}

/// Writes `summary.txt`, `config.toml` and whichever tables the mode produced.
pub fn write_bundle(bundle: &ResultBundle, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    write_atomic(&dir.join("summary.txt"), &summary_text(bundle))?;
    write_atomic(&dir.join("config.toml"), &bundle.echo)?;
    if !bundle.density.is_empty() {
        write_atomic(&dir.join("density.csv"), &density_csv(&bundle.density))?;
        write_atomic(&dir.join("field.csv"), &field_csv(&bundle.field))?;
    }
    if !bundle.green.is_empty() {
        write_atomic(&dir.join("green.csv"), &green_csv(&bundle.green))?;
    }
    if !bundle.reports.is_empty() {
        write_atomic(&dir.join("reports.csv"), &reports_to_csv(&bundle.reports))?;
    }
    Ok(())
}

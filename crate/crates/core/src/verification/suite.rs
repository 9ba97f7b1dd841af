//! Property registry and the suite driver that runs it over a configuration matrix.

use std::fmt::Write as _;

use sha2::{Digest, Sha256};

use crate::error::Result;
use crate::geometry::{BoundaryCurve, PeriodicityCell};
use crate::kernels::{LameEnv, PeriodicLame};
use crate::operators::{assemble_operators, BoundaryOperators};
use crate::verification::checks::*;
use crate::verification::manufactured::{DifferenceOfSources, ShapeKind};

/// One registered property.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PropertySpec {
    pub name: &'static str,
    /// The statement being checked, as a short formula.
    pub anchor: &'static str,
    /// Module the property belongs to.
    pub module: &'static str,
    pub tolerance: f64,
}

const fn prop(name: &'static str, anchor: &'static str, module: &'static str, tolerance: f64) -> PropertySpec {
    PropertySpec {
        name,
        anchor,
        module,
        tolerance,
    }
}

/// Every property the suite reports, each listed once.
pub const REGISTRY: &[PropertySpec] = &[
    prop("kernels.closed_forms", "T(w,I)=2wI; Gamma(1,0) for w=1; S_3(e3)=-1/(4pi)", "lame_kernels", 1e-15),
    prop("green.oracle", "Gamma^q equals its damped Fourier series", "lame_kernels", 1e-9),
    prop("green.symmetry", "Gamma^q(x) symmetric", "lame_kernels", 1e-9),
    prop("green.evenness", "Gamma^q(x) = Gamma^q(-x)", "lame_kernels", 1e-9),
    prop("green.periodicity", "Gamma^q(x + q_ll e_l) = Gamma^q(x)", "lame_kernels", 1e-9),
    prop("green.pde_residual", "L[w]Gamma^q = sum delta_qz I - I/|Q|", "lame_kernels", 1e-6),
    prop("green.pde_order", "fourth-order stencil error O(h^4) (4 - observed order)", "lame_kernels", 0.5),
    prop("green.regular_limit", "Gamma^q - Gamma extends analytically to 0", "lame_kernels", 1e-8),
    prop("green.harmonic_limit", "w -> 0: Gamma^q -> S^q I", "lame_kernels", 1e-6),
    prop("wstar.kernel_split", "smooth + Cauchy parts recombine to the W* kernel", "boundary_operators", 1e-12),
    prop("wstar.integral_identity", "int W*mu = (1/2 - |Omega_Q|/|Q|) int mu", "boundary_operators", 1e-8),
    prop("wstar.jump_relation", "T(w,Dv^+)nu = -mu/2 + W*mu (hole side)", "boundary_operators", 1e-6),
    prop("single_layer.periodicity", "v_q[w,mu] is q-periodic", "boundary_operators", 1e-10),
    prop("single_layer.pde", "L[w]v_q[w,mu] = -(1/|Q|) int mu (relative)", "boundary_operators", 1e-5),
    prop("robin.constant_solution", "u = c* for g = -c*, a = I, b = -I", "robin_solver", 1e-10),
    prop("robin.linear_field", "u = B q^-1 x", "robin_solver", 1e-9),
    prop("robin.homogeneous", "g = 0, B = 0 implies u = 0", "robin_solver", 1e-10),
    prop("robin.manufactured", "u = v_q[w,mu] + c + B q^-1 x reproduces u*", "robin_solver", 1e-8),
    prop("robin.convergence", "error ratio N_min -> N_max (inverse) at most 1e-2", "robin_solver", 1e-2),
    prop("robin.quasi_periodicity", "u(x + q e_j) = u(x) + B e_j", "robin_solver", 1e-10),
    prop("robin.mean_zero", "int mu dsigma = 0 (relative to 1 + |mu|)", "robin_solver", 1e-10),
    prop("robin.admissibility", "each violated assumption rejected by name", "robin_solver", 0.5),
    prop("neumann.round_trip", "(I/2 + W*) mu = psi residual", "robin_solver", 1e-11),
    prop("neumann.mean_identity", "int psi = (1 - |Omega_Q|/|Q|) int mu", "robin_solver", 1e-8),
    prop("representation.round_trip", "unique (mu, c) with u = v_q[w,mu] + c", "robin_solver", 1e-9),
    prop("nonlinear.affine_equivalence", "G = -b u + g matches the linear solver", "nonlinear_robin", 1e-9),
    prop("nonlinear.manufactured", "chord iteration recovers u* (30 iterations max)", "nonlinear_robin", 1e-7),
    prop("nonlinear.method_agreement", "chord and Newton agree within 10 tol", "nonlinear_robin", 1e-10),
    prop("nonlinear.degeneracy", "G = 0 reported as rank deficient", "nonlinear_robin", 0.5),
];

pub fn property(name: &str) -> Option<&'static PropertySpec> {
    REGISTRY.iter().find(|p| p.name == name)
}

/// Deliberate corruption used to show that the suite can fail.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Fault {
    /// Scales the quadrature weight of node 0 in the assembled `W*` by `1 + 1e-3`.
    CorruptWstarWeight,
}

/// The configuration matrix.
#[derive(Clone, Debug)]
pub struct SuiteConfig {
    pub cells: Vec<[f64; 2]>,
    pub omegas: Vec<f64>,
    pub shapes: Vec<ShapeKind>,
    pub nodes: Vec<usize>,
    /// Lattice-sum tolerance.
    pub tol: f64,
    pub seed: u64,
    pub fault: Option<Fault>,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            cells: vec![[1.0, 1.0], [2.0, 3.0]],
            omegas: vec![0.5, 1.0, 4.0],
            shapes: ShapeKind::ALL.to_vec(),
            nodes: vec![64, 128, 256],
            tol: 1e-12,
            seed: 2024,
            fault: None,
        }
    }
}

/// Outcome of one property on one configuration.
#[derive(Clone, Debug, PartialEq)]
pub struct OracleReport {
    pub property: String,
    pub anchor: String,
    pub max_error: f64,
    pub tolerance: f64,
    pub pass: bool,
    /// Human-readable configuration.
    pub config: String,
    pub fingerprint: String,
}

impl OracleReport {
    pub fn new(spec: &PropertySpec, max_error: f64, config: &str) -> Self {
        Self {
            property: spec.name.to_string(),
            anchor: spec.anchor.to_string(),
            max_error,
            tolerance: spec.tolerance,
            // NaN never passes
            pass: max_error <= spec.tolerance,
            config: config.to_string(),
            fingerprint: fingerprint(config),
        }
    }

    fn failed(spec: &PropertySpec, config: &str, err: &crate::Error) -> Self {
        let mut r = Self::new(spec, f64::INFINITY, config);
        let _ = write!(r.config, " [error: {err}]");
        r
    }
}

/// First 16 hex digits of the SHA-256 of `text`.
pub fn fingerprint(text: &str) -> String {
    let digest = Sha256::digest(text.as_bytes());
    digest.iter().take(8).fold(String::new(), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

fn describe(cell: &[f64; 2], omega: f64, shape: Option<ShapeKind>, n: Option<usize>, tol: f64) -> String {
    let mut s = format!("cell={}x{} omega={omega}", cell[0], cell[1]);
    if let Some(shape) = shape {
        let _ = write!(s, " shape={}", shape.name());
    }
    if let Some(n) = n {
        let _ = write!(s, " N={n}");
    }
    let _ = write!(s, " tol={tol:e}");
    s
}

struct Sink<'a> {
    out: &'a mut Vec<OracleReport>,
    config: String,
}

impl Sink<'_> {
    fn push(&mut self, name: &str, value: Result<f64>) {
        let spec = property(name).expect("unregistered property");
        self.out.push(match value {
            Ok(v) => OracleReport::new(spec, v, &self.config),
            Err(e) => OracleReport::failed(spec, &self.config, &e),
        });
    }
}

/// Runs every registered property over the configuration matrix.
///
/// Kernel properties run once per `(cell, omega)`; boundary, Robin and
/// nonlinear properties once per `(cell, omega, shape, N)`, with the
/// manufactured-solution accuracy checks restricted to `N >= 128`. The jump
/// relation needs `3N` near-boundary potential evaluations, so it runs at
/// the largest `N` only, for every `(cell, shape)` at one `omega` (1 if
/// present). Failures are reported, never raised. Reports are ordered by
/// property name, then configuration.
pub fn run_property_suite(cfg: &SuiteConfig) -> Vec<OracleReport> {
    let mut out = Vec::new();
    let seed = cfg.seed;
    let jump_omega = if cfg.omegas.contains(&1.0) { 1.0 } else { cfg.omegas[0] };
    let n_max = cfg.nodes.iter().copied().max().unwrap_or(0);
    let n_min = cfg.nodes.iter().copied().min().unwrap_or(0);

    {
        let mut sink = Sink {
            out: &mut out,
            config: "closed forms".to_string(),
        };
        for &omega in &cfg.omegas {
            sink.config = format!("omega={omega}");
            sink.push("kernels.closed_forms", closed_form_values_error(omega));
        }
    }

    for cell_edges in &cfg.cells {
        let cell = match PeriodicityCell::new(cell_edges) {
            Ok(c) => c,
            Err(e) => {
                // every property of this cell fails
                let config = format!("cell={}x{}", cell_edges[0], cell_edges[1]);
                for spec in REGISTRY.iter().filter(|p| p.name != "kernels.closed_forms") {
                    out.push(OracleReport::failed(spec, &config, &e));
                }
                continue;
            }
        };
        {
            let mut sink = Sink {
                out: &mut out,
                config: format!("cell={}x{} omega=1e-8 tol={:e}", cell_edges[0], cell_edges[1], cfg.tol),
            };
            sink.push("green.harmonic_limit", harmonic_limit_error(&cell, cfg.tol, 20, seed));
        }
        for &omega in &cfg.omegas {
            let kernel = match LameEnv::planar(omega).and_then(|env| PeriodicLame::with_tol(env, cell, cfg.tol)) {
                Ok(k) => k,
                Err(e) => {
                    let config = describe(cell_edges, omega, None, None, cfg.tol);
                    for spec in REGISTRY.iter().filter(|p| p.name != "kernels.closed_forms") {
                        out.push(OracleReport::failed(spec, &config, &e));
                    }
                    continue;
                }
            };
            run_kernel_properties(&kernel, &mut Sink {
                out: &mut out,
                config: describe(cell_edges, omega, None, None, cfg.tol),
            }, seed);

            for &shape in &cfg.shapes {
                let exact = DifferenceOfSources::standard(shape, &cell);
                let mut conv: Vec<(usize, Result<f64>)> = Vec::new();
                for &n in &cfg.nodes {
                    let config = describe(cell_edges, omega, Some(shape), Some(n), cfg.tol);
                    let mut sink = Sink {
                        out: &mut out,
                        config,
                    };
                    let setup = BoundaryCurve::discretize(&shape.spec(&cell), n, &cell)
                        .and_then(|c| assemble_operators(&c, &kernel).map(|ops| (c, ops)));
                    let (curve, ops) = match setup {
                        Ok(v) => v,
                        Err(e) => {
                            for spec in REGISTRY.iter().filter(|p| p.module != "lame_kernels") {
                                sink.out.push(OracleReport::failed(spec, &sink.config, &e));
                            }
                            continue;
                        }
                    };
                    let ctx = Ctx {
                        curve: &curve,
                        kernel: &kernel,
                        ops: &ops,
                        exact: &exact,
                        seed,
                        fault: cfg.fault,
                    };
                    run_boundary_properties(&ctx, &mut sink, n >= 128);
                    if n == n_max && omega == jump_omega {
                        let mu = jump_density(&curve);
                        sink.push("wstar.jump_relation", jump_relation_error(&curve, &kernel, &ops, &mu, Side::Hole));
                    }
                    if n == n_min || n == n_max {
                        conv.push((n, manufactured_robin_error(&exact, &curve, &kernel, &ops, 20, seed)));
                    }
                }
                if n_min < n_max {
                    let config = format!(
                        "{} N={n_min}->{n_max}",
                        describe(cell_edges, omega, Some(shape), None, cfg.tol)
                    );
                    let mut sink = Sink { out: &mut out, config };
                    let value = match (conv.remove(0).1, conv.remove(0).1) {
                        (Ok(coarse), Ok(fine)) => Ok(convergence_measure(coarse, fine)),
                        (Err(e), _) | (_, Err(e)) => Err(e),
                    };
                    sink.push("robin.convergence", value);
                }
            }
        }
    }
    out.sort_by(|a, b| a.property.cmp(&b.property).then_with(|| a.config.cmp(&b.config)));
    out
}

/// `fine / coarse`, or zero when the coarse error is already at rounding
/// level and no further decay can be observed.
pub fn convergence_measure(coarse: f64, fine: f64) -> f64 {
    if coarse <= 1e-12 {
        0.0
    } else {
        fine / coarse
    }
}

fn run_kernel_properties(kernel: &PeriodicLame, sink: &mut Sink<'_>, seed: u64) {
    sink.push("green.oracle", green_oracle_error(kernel, 20, seed));
    sink.push("green.symmetry", green_symmetry_error(kernel, 50, seed + 1));
    sink.push("green.evenness", green_evenness_error(kernel, 50, seed + 2));
    sink.push("green.periodicity", green_periodicity_error(kernel, 50, seed + 3));
    match green_pde_residual(kernel, 10, 1e-3, seed + 4) {
        Ok((res, order)) => {
            sink.push("green.pde_residual", Ok(res));
            sink.push("green.pde_order", Ok((4.0 - order).max(0.0)));
        }
        Err(e) => {
            let e2 = crate::Error::Oracle(e.to_string());
            sink.push("green.pde_residual", Err(e));
            sink.push("green.pde_order", Err(e2));
        }
    }
    sink.push("green.regular_limit", regular_part_limit_error(kernel));
}

struct Ctx<'a> {
    curve: &'a BoundaryCurve,
    kernel: &'a PeriodicLame,
    ops: &'a BoundaryOperators,
    exact: &'a DifferenceOfSources,
    seed: u64,
    fault: Option<Fault>,
}

fn run_boundary_properties(ctx: &Ctx<'_>, sink: &mut Sink<'_>, resolved: bool) {
    let Ctx {
        curve,
        kernel,
        ops,
        exact,
        seed,
        fault,
    } = *ctx;
    sink.push("wstar.kernel_split", kernel_split_error(curve, kernel, 20, seed));
    let identity = match fault {
        Some(Fault::CorruptWstarWeight) => {
            let mut bad = ops.clone();
            for r in 0..bad.wstar.matrix.nrows() {
                bad.wstar.matrix[(r, 0)] *= 1.0 + 1e-3;
                bad.wstar.matrix[(r, 1)] *= 1.0 + 1e-3;
            }
            integral_identity_error(curve, &bad, 10, seed)
        }
        None => integral_identity_error(curve, ops, 10, seed),
    };
    sink.push("wstar.integral_identity", identity);
    sink.push("single_layer.periodicity", single_layer_periodicity_error(curve, kernel, seed));
    sink.push("single_layer.pde", single_layer_pde_error(curve, kernel, seed));

    sink.push("robin.constant_solution", constant_solution_error(curve, kernel, ops));
    sink.push("robin.linear_field", linear_field_error(curve, kernel, ops, seed));
    sink.push("robin.homogeneous", homogeneous_error(curve, kernel, ops));
    let drifted = exact
        .clone()
        .with_constant(nalgebra::Vector2::new(0.2, -0.1))
        .with_drift(nalgebra::Matrix2::new(0.3, -0.1, 0.2, 0.05));
    sink.push("robin.quasi_periodicity", quasi_periodicity_error(&drifted, curve, kernel, ops, seed));
    sink.push("robin.mean_zero", mean_zero_error(&drifted, curve, kernel, ops));
    sink.push("robin.admissibility", Ok(admissibility_misclassified(curve) as f64));
    match neumann_aux_errors(curve, ops, 5, seed) {
        Ok((round, mean)) => {
            sink.push("neumann.round_trip", Ok(round));
            sink.push("neumann.mean_identity", Ok(mean));
        }
        Err(e) => {
            let e2 = crate::Error::Oracle(e.to_string());
            sink.push("neumann.round_trip", Err(e));
            sink.push("neumann.mean_identity", Err(e2));
        }
    }
    sink.push("representation.round_trip", representation_error(curve, ops, seed));
    sink.push("nonlinear.affine_equivalence", affine_equivalence_error(curve, kernel, ops));
    sink.push("nonlinear.method_agreement", method_agreement_error(&drifted, curve, kernel, ops, 1e-11));
    sink.push(
        "nonlinear.degeneracy",
        Ok(if zero_model_reported(curve, kernel, ops) { 0.0 } else { 1.0 }),
    );
    if resolved {
        sink.push("robin.manufactured", manufactured_robin_error(exact, curve, kernel, ops, 20, seed));
        sink.push(
            "nonlinear.manufactured",
            manufactured_nonlinear_error(&drifted, curve, kernel, ops, seed).map(|(e, _)| e),
        );
    }
}

/// Reports as CSV with header `property,anchor,max_error,tolerance,pass,config,fingerprint`.
pub fn reports_to_csv(reports: &[OracleReport]) -> String {
    let mut s = String::from("property,anchor,max_error,tolerance,pass,config,fingerprint\n");
    for r in reports {
        let _ = writeln!(
            s,
            "{},{},{:e},{:e},{},{},{}",
            r.property,
            csv_field(&r.anchor),
            r.max_error,
            r.tolerance,
            r.pass,
            csv_field(&r.config),
            r.fingerprint
        );
    }
    s
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

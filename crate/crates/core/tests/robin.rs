mod common;

use common::*;
use nalgebra::{Matrix2, Vector2};
use perilame::kernels::traction_map2;
use perilame::operators::{assemble_operators, boundary_integral, BoundaryMatrixField, BoundaryVectorField};
use perilame::robin::*;
use perilame::{BoundaryCurve, Error, Point};

fn unit_data(curve: &BoundaryCurve, g: Vector2<f64>, drift: Matrix2<f64>) -> RobinData {
    RobinData {
        a: BoundaryMatrixField::constant(curve, Matrix2::identity()),
        b: BoundaryMatrixField::constant(curve, -Matrix2::identity()),
        g: BoundaryVectorField::constant(curve, g),
        drift,
    }
}

fn mu_c_distance(x: &SolutionRep, y: &SolutionRep) -> f64 {
    let dmu = x.mu.values().iter().zip(y.mu.values()).map(|(a, b)| (a - b).amax()).fold(0.0, f64::max);
    dmu.max((x.c - y.c).amax())
}

#[test]
fn system_layout_and_zero_rhs() {
    let k = kernel(1.0, 1e-12);
    let c = curve(&circle(), 64);
    let ops = assemble_operators(&c, &k).unwrap();
    let sys = assemble_robin_system(&unit_data(&c, Vector2::zeros(), Matrix2::zeros()), &c, &ops, &k).unwrap();
    assert_eq!((sys.matrix.nrows(), sys.matrix.ncols()), (130, 130));
    assert_eq!(sys.dim(), 130);
    assert_eq!(sys.rhs.amax(), 0.0);
    assert_eq!(sys.c_index(1), 129);
    // constraint rows only touch mu columns
    assert_eq!(sys.matrix[(128, 128)], 0.0);
    assert!((sys.matrix.row(128).sum() - 1.0).abs() < 1e-13);
}

#[test]
fn drift_rhs_matches_direct_formula() {
    let omega = 1.7;
    let k = kernel(omega, 1e-12);
    let c = curve(&ellipse(), 32);
    let ops = assemble_operators(&c, &k).unwrap();
    let bq = Matrix2::new(0.2, 0.05, -0.03, -0.1);
    let (a, b) = variable_coefficients(&c);
    let g = BoundaryVectorField::from_fn(&c, |p| Vector2::new(p.t.sin(), 0.4));
    let data = RobinData { a, b, g, drift: bq };
    let sys = assemble_robin_system(&data, &c, &ops, &k).unwrap();
    for i in 0..c.len() {
        let p = c.point(i);
        // second path: solve a y = g - b B x instead of forming a^{-1}
        let div = bq.trace();
        let sym = bq + bq.transpose();
        let traction = Vector2::new(
            (omega - 1.0) * div * p.normal[0] + sym.row(0).transpose().dot(&p.normal),
            (omega - 1.0) * div * p.normal[1] + sym.row(1).transpose().dot(&p.normal),
        );
        let y = data.a.get(i).lu().solve(&(data.g.get(i) - data.b.get(i) * bq * p.point)).unwrap();
        let expect = y - traction;
        assert!((sys.rhs[2 * i] - expect[0]).abs() < 1e-14);
        assert!((sys.rhs[2 * i + 1] - expect[1]).abs() < 1e-14);
    }
}

#[test]
fn constant_solution_is_exact() {
    let k = kernel(1.0, 1e-12);
    let c = curve(&circle(), 64);
    let cstar = Vector2::new(0.3, -0.7);
    let rep = solve_robin(&unit_data(&c, -cstar, Matrix2::zeros()), &c, &k).unwrap();
    assert!(rep.mu.sup_norm() < 1e-10);
    assert!((rep.c - cstar).amax() < 1e-10);
    let u = eval_solution(&rep, &Point::new(0.05, 0.1), &c, &k).unwrap();
    assert!((u.value - cstar).amax() < 1e-10);
}

#[test]
fn linear_field_is_exact() {
    let omega = 1.0;
    let k = kernel(omega, 1e-12);
    let c = curve(&ellipse(), 64);
    let drift = Matrix2::new(0.2, 0.0, 0.0, -0.1);
    let g = BoundaryVectorField::from_fn(&c, |p| traction_map2(omega, &drift) * p.normal - drift * p.point);
    let mut data = unit_data(&c, Vector2::zeros(), drift);
    data.g = g;
    let rep = solve_robin(&data, &c, &k).unwrap();
    assert!(rep.mu.sup_norm() < 1e-9 && rep.c.amax() < 1e-9);
    let eval = SolutionEvaluator::new(&rep, &c, &k).unwrap();
    for x in exterior_points(&c, 10, 0.01, 3) {
        assert!((eval.eval(&x).unwrap().value - drift * x).amax() < 1e-9);
    }
}

#[test]
fn homogeneous_problem_has_only_the_zero_solution() {
    let k = kernel(0.5, 1e-12);
    for shape in [circle(), ellipse()] {
        let c = curve(&shape, 64);
        let (a, b) = variable_coefficients(&c);
        let data = RobinData {
            a,
            b,
            g: BoundaryVectorField::constant(&c, Vector2::zeros()),
            drift: Matrix2::zeros(),
        };
        let rep = solve_robin(&data, &c, &k).unwrap();
        assert!(rep.mu.sup_norm() + rep.c.norm() < 1e-10);
    }
}

#[test]
fn manufactured_solution_converges_spectrally() {
    let k = kernel(1.0, 1e-12);
    let src = Sources::default();
    let shift = Vector2::new(0.1, -0.2);
    let mut errors = Vec::new();
    for n in [64, 128, 256] {
        let c = curve(&circle(), n);
        let data = manufactured_data(&c, &k, &src, shift, Matrix2::zeros());
        let rep = solve_robin(&data, &c, &k).unwrap();
        let mu_mean = boundary_integral(&rep.mu, &c).unwrap().norm();
        assert!(mu_mean < 1e-10 * (1.0 + rep.mu.sup_norm()));
        let eval = SolutionEvaluator::new(&rep, &c, &k).unwrap();
        let err = exterior_points(&c, 20, 0.02, 11)
            .iter()
            .map(|x| (eval.eval(x).unwrap().value - src.value(&k, x) - shift).amax())
            .fold(0.0, f64::max);
        errors.push(err);
    }
    assert!(errors[1] < 1e-8, "{errors:?}");
    assert!(errors[0] / errors[2] > 1e2, "{errors:?}");
    assert!(errors[0] > 10.0 * errors[1], "{errors:?}");
}

#[test]
fn quasi_periodicity_with_drift() {
    let omega = 4.0;
    let k = kernel(omega, 1e-12);
    let c = curve(&ellipse(), 64);
    let drift = Matrix2::new(0.3, -0.1, 0.2, 0.05);
    let data = manufactured_data(&c, &k, &Sources::default(), Vector2::new(0.2, 0.0), drift);
    let rep = solve_robin(&data, &c, &k).unwrap();
    let eval = SolutionEvaluator::new(&rep, &c, &k).unwrap();
    for x in exterior_points(&c, 5, 0.02, 5) {
        let u = eval.eval(&x).unwrap().value;
        for j in 0..2 {
            let mut y = x;
            y[j] += 1.0;
            let du = eval.eval(&y).unwrap().value - u;
            assert!((du - drift.column(j)).amax() < 1e-10);
        }
    }
}

#[test]
fn node_relabelling_does_not_change_the_solution() {
    let k = kernel(1.0, 1e-12);
    let base = curve(&ellipse(), 64);
    let moved = base.shifted(5);
    let solve = |c: &BoundaryCurve| {
        let data = manufactured_data(c, &k, &Sources::default(), Vector2::new(0.1, 0.3), Matrix2::zeros());
        solve_robin(&data, c, &k).unwrap()
    };
    let (r0, r1) = (solve(&base), solve(&moved));
    assert!((r0.c - r1.c).amax() < 1e-11);
    let interp = r1.mu.interpolant(&moved);
    for i in 0..base.len() {
        let t = base.point(i).t;
        let m = Vector2::new(interp[0].eval(t), interp[1].eval(t));
        assert!((m - r0.mu.get(i)).amax() < 1e-11);
    }
}

#[test]
fn scaling_a_b_g_together_is_invisible() {
    let k = kernel(1.0, 1e-12);
    let c = curve(&circle(), 64);
    let data = manufactured_data(&c, &k, &Sources::default(), Vector2::new(0.1, 0.3), Matrix2::zeros());
    let lambda = 3.7;
    let scaled = RobinData {
        a: BoundaryMatrixField::new(&c, data.a.values().iter().map(|m| m * lambda).collect()).unwrap(),
        b: BoundaryMatrixField::new(&c, data.b.values().iter().map(|m| m * lambda).collect()).unwrap(),
        g: data.g.scaled(lambda),
        drift: data.drift,
    };
    let r0 = solve_robin(&data, &c, &k).unwrap();
    let r1 = solve_robin(&scaled, &c, &k).unwrap();
    assert!(mu_c_distance(&r0, &r1) < 1e-12);
}

#[test]
fn off_node_residual_tracks_discretization() {
    let k = kernel(1.0, 1e-12);
    let src = Sources::default();
    let mut off = Vec::new();
    for n in [64, 128] {
        let c = curve(&circle(), n);
        let rep = solve_robin(&manufactured_data(&c, &k, &src, Vector2::zeros(), Matrix2::zeros()), &c, &k).unwrap();
        assert!(rep.diagnostics.residual_on_node < 1e-13);
        off.push(rep.diagnostics.residual_off_node);
    }
    assert!(off[1] < 1e-2 * off[0], "{off:?}");
}

#[test]
fn evaluation_inside_hole_is_rejected() {
    let k = kernel(1.0, 1e-12);
    let c = curve(&circle(), 32);
    let rep = solve_robin(&unit_data(&c, Vector2::new(1.0, 0.0), Matrix2::zeros()), &c, &k).unwrap();
    assert!(matches!(
        eval_solution(&rep, &Point::new(1.5, 0.5), &c, &k),
        Err(Error::InsideHole(..))
    ));
}

#[test]
fn inadmissible_data_is_not_solved() {
    let k = kernel(1.0, 1e-12);
    let c = curve(&circle(), 32);
    let mut data = unit_data(&c, Vector2::zeros(), Matrix2::zeros());
    data.b = BoundaryMatrixField::constant(&c, Matrix2::identity());
    assert!(matches!(solve_robin(&data, &c, &k), Err(Error::Inadmissible(_))));
}

#[test]
fn neumann_aux_round_trip_and_mean_identity() {
    let k = kernel(1.0, 1e-12);
    for shape in [circle(), ellipse()] {
        let c = curve(&shape, 128);
        let ops = assemble_operators(&c, &k).unwrap();
        let zero = solve_neumann_aux(&BoundaryVectorField::zeros(c.len()), &c, &ops).unwrap();
        assert_eq!(zero.mu.sup_norm(), 0.0);
        let factor = 1.0 - c.hole_area() / c.cell().volume();
        for seed in 0..5 {
            let psi = random_trig_density(&c, seed, false);
            let sol = solve_neumann_aux(&psi, &c, &ops).unwrap();
            assert!(sol.residual < 1e-11);
            let lhs = boundary_integral(&psi, &c).unwrap();
            let rhs = boundary_integral(&sol.mu, &c).unwrap() * factor;
            assert!((lhs - rhs).amax() < 1e-8);
        }
    }
}

#[test]
fn representation_recovers_density_and_constant() {
    let k = kernel(1.0, 1e-12);
    let c = curve(&ellipse(), 128);
    let ops = assemble_operators(&c, &k).unwrap();

    let c0 = Vector2::new(-0.4, 0.9);
    let values = BoundaryVectorField::constant(&c, c0);
    let rep = representation_roundtrip(&values, &BoundaryVectorField::zeros(c.len()), &c, &ops, 1e-12).unwrap();
    assert!(rep.mu.sup_norm() < 1e-14 && (rep.c - c0).amax() < 1e-14);

    let mu0 = random_trig_density(&c, 42, true);
    let vmu = ops.single_layer.apply(&mu0).unwrap();
    let wmu = ops.wstar.apply(&mu0).unwrap();
    let values = BoundaryVectorField::new(&c, vmu.values().iter().map(|v| v + c0).collect()).unwrap();
    let traction = BoundaryVectorField::new(
        &c,
        wmu.values().iter().zip(mu0.values()).map(|(w, m)| w + m * 0.5).collect(),
    )
    .unwrap();
    let rep = representation_roundtrip(&values, &traction, &c, &ops, 1e-9).unwrap();
    let dmu = rep.mu.values().iter().zip(mu0.values()).map(|(a, b)| (a - b).amax()).fold(0.0, f64::max);
    assert!(dmu < 1e-9 && (rep.c - c0).amax() < 1e-9);
}

#[test]
fn representation_of_manufactured_field() {
    let k = kernel(1.0, 1e-12);
    let c = curve(&circle(), 128);
    let ops = assemble_operators(&c, &k).unwrap();
    let src = Sources::default();
    let values = BoundaryVectorField::from_fn(&c, |p| src.value(&k, &p.point));
    let traction = BoundaryVectorField::from_fn(&c, |p| src.traction(&k, &p.point, &p.normal));
    let rep = representation_roundtrip(&values, &traction, &c, &ops, 1e-8).unwrap();
    let sol = SolutionRep {
        mu: rep.mu,
        c: rep.c,
        drift: Matrix2::zeros(),
        diagnostics: SolveDiagnostics {
            residual_on_node: 0.0,
            residual_off_node: 0.0,
            condition_estimate: 0.0,
            det_integral_ainv_b: 0.0,
            integral_condition: 0.0,
            mean_constraint: 0.0,
            iterations: 0,
            trace: Vec::new(),
        },
    };
    let eval = SolutionEvaluator::new(&sol, &c, &k).unwrap();
    for x in exterior_points(&c, 10, 0.02, 9) {
        assert!((eval.eval(&x).unwrap().value - src.value(&k, &x)).amax() < 1e-8);
    }
}

#[test]
fn representation_mismatch_is_flagged() {
    let k = kernel(1.0, 1e-12);
    let c = curve(&circle(), 32);
    let ops = assemble_operators(&c, &k).unwrap();
    // not a Lame field: values unrelated to the traction
    let values = BoundaryVectorField::from_fn(&c, |p| Vector2::new(p.t.cos(), 0.0));
    let err = representation_roundtrip(&values, &BoundaryVectorField::zeros(c.len()), &c, &ops, 1e-8).unwrap_err();
    assert!(matches!(err, Error::RepresentationMismatch { .. }));
}

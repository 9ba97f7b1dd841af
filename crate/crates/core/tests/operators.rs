mod common;

use std::f64::consts::PI;

use common::{circle, curve, ellipse, kernel};
use nalgebra::{Matrix2, Vector2};
use perilame::kernels::traction_map2;
use perilame::operators::{
    assemble_operators, assemble_scalar_single_layer, assemble_single_layer, boundary_integral, eval_single_layer,
    eval_traction_offboundary, BoundaryVectorField, PotentialEvaluator,
};
use perilame::verification::checks::{
    integral_identity_error, jump_density, jump_relation_error, kernel_split_error, single_layer_pde_error,
    single_layer_periodicity_error, Side,
};
use perilame::verification::manufactured::{exterior_points, random_trig_density};
use perilame::{BoundaryCurve, PeriodicityCell, ShapeSpec};

#[test]
fn integral_identity_for_constant_density() {
    let c = curve(&circle(), 128);
    let ops = assemble_operators(&c, &kernel(1.0, 1e-12)).unwrap();
    let mu = BoundaryVectorField::constant(&c, Vector2::new(1.0, 0.0));
    let lhs = boundary_integral(&ops.wstar.apply(&mu).unwrap(), &c).unwrap();
    let expected = (0.5 - PI / 16.0) * (PI / 2.0);
    assert!((lhs - Vector2::new(expected, 0.0)).amax() < 1e-8, "{lhs}");
}

#[test]
fn integral_identity_for_random_densities() {
    for shape in [circle(), ellipse()] {
        let c = curve(&shape, 128);
        let ops = assemble_operators(&c, &kernel(0.5, 1e-12)).unwrap();
        let err = integral_identity_error(&c, &ops, 10, 17).unwrap();
        assert!(err < 1e-8, "{err:e}");
    }
}

#[test]
fn jump_relation_on_both_sides() {
    let k = kernel(1.0, 1e-12);
    for shape in [circle(), ellipse()] {
        let c = curve(&shape, 256);
        let ops = assemble_operators(&c, &k).unwrap();
        let mu = jump_density(&c);
        for side in [Side::Hole, Side::Perforated] {
            let err = jump_relation_error(&c, &k, &ops, &mu, side).unwrap();
            assert!(err < 1e-6, "{side:?}: {err:e}");
        }
    }
}

#[test]
fn zero_density_gives_zero() {
    let c = curve(&ellipse(), 64);
    let k = kernel(1.0, 1e-10);
    let ops = assemble_operators(&c, &k).unwrap();
    let zero = BoundaryVectorField::zeros(64);
    assert_eq!(ops.wstar.apply(&zero).unwrap().sup_norm(), 0.0);
    assert_eq!(ops.single_layer.apply(&zero).unwrap().sup_norm(), 0.0);
    let v = eval_single_layer(&Vector2::new(0.05, 0.1), &zero, &c, &k).unwrap();
    assert_eq!(v.value, Vector2::zeros());
}

#[test]
fn single_layer_is_linear() {
    let c = curve(&ellipse(), 64);
    let k = kernel(2.0, 1e-10);
    let v = assemble_single_layer(&c, &k).unwrap();
    let (m1, m2) = (random_trig_density(&c, 1), random_trig_density(&c, 2));
    let combo = BoundaryVectorField::from_values(
        m1.values().iter().zip(m2.values()).map(|(a, b)| a * 1.5 - b * 0.25).collect(),
    );
    let lhs = v.apply(&combo).unwrap();
    let (r1, r2) = (v.apply(&m1).unwrap(), v.apply(&m2).unwrap());
    for i in 0..64 {
        assert!((lhs.get(i) - (r1.get(i) * 1.5 - r2.get(i) * 0.25)).amax() < 1e-14);
    }
}

#[test]
fn decoupled_single_layer_matches_scalar_assembly() {
    let c = curve(&circle(), 128);
    let k = kernel(1e-300, 1e-12);
    let v = assemble_single_layer(&c, &k).unwrap();
    let s = assemble_scalar_single_layer(&c, &k).unwrap();
    let mut worst: f64 = 0.0;
    for i in 0..128 {
        for j in 0..128 {
            for l in 0..2 {
                worst = worst.max((v.matrix[(2 * i + l, 2 * j + l)] - s[(i, j)]).abs());
            }
            worst = worst.max(v.matrix[(2 * i, 2 * j + 1)].abs());
        }
    }
    assert!(worst < 1e-10, "{worst:e}");
}

#[test]
fn single_layer_self_convergence() {
    let k = kernel(1.0, 1e-12);
    let (coarse, fine) = (curve(&ellipse(), 64), curve(&ellipse(), 256));
    let density = |c: &BoundaryCurve| BoundaryVectorField::from_fn(c, |p| Vector2::new(p.t.cos(), (2.0 * p.t).sin()));
    let vc = assemble_single_layer(&coarse, &k).unwrap().apply(&density(&coarse)).unwrap();
    let vf = assemble_single_layer(&fine, &k).unwrap().apply(&density(&fine)).unwrap();
    for i in 0..64 {
        assert!((coarse.point(i).t - fine.point(4 * i).t).abs() < 1e-14);
        assert!((vc.get(i) - vf.get(4 * i)).amax() < 1e-10);
    }
}

#[test]
fn potential_periodicity_and_pde() {
    for (edges, omega) in [([1.0, 1.0], 1.0), ([2.0, 3.0], 4.0)] {
        let cell = PeriodicityCell::new(&edges).unwrap();
        let shape = ShapeSpec::Ellipse {
            center: [edges[0] / 2.0, edges[1] / 2.0],
            semi_axes: [0.3, 0.2],
            rotation: 0.3,
        };
        let c = BoundaryCurve::discretize(&shape, 128, &cell).unwrap();
        let k = perilame::PeriodicLame::with_tol(perilame::LameEnv::planar(omega).unwrap(), cell, 1e-12).unwrap();
        assert!(single_layer_periodicity_error(&c, &k, 3).unwrap() < 1e-10);
        assert!(single_layer_pde_error(&c, &k, 3).unwrap() < 1e-5);
    }
}

#[test]
fn traction_matches_differentiated_potential() {
    let c = curve(&ellipse(), 128);
    let k = kernel(1.5, 1e-12);
    let mu = random_trig_density(&c, 8);
    let eval = PotentialEvaluator::new(&c, &k, &mu).unwrap();
    let h = 1e-5;
    let nu = Vector2::new(0.6, -0.8);
    for x in exterior_points(&c, 10, 0.05, 2) {
        let mut jac = Matrix2::zeros();
        for d in 0..2 {
            let mut e = Vector2::zeros();
            e[d] = h;
            let fd = (eval.single_layer(&(x + e)).unwrap().value - eval.single_layer(&(x - e)).unwrap().value) / (2.0 * h);
            jac.set_column(d, &fd);
        }
        let t = eval_traction_offboundary(&x, &nu, &mu, &c, &k).unwrap().value;
        assert!((t - traction_map2(1.5, &jac) * nu).amax() < 1e-7);
    }
}

#[test]
fn traction_is_linear_in_density() {
    let c = curve(&circle(), 64);
    let k = kernel(1.0, 1e-10);
    let (m1, m2) = (random_trig_density(&c, 4), random_trig_density(&c, 5));
    let sum = BoundaryVectorField::from_values(m1.values().iter().zip(m2.values()).map(|(a, b)| a + b).collect());
    let x = Vector2::new(0.05, 0.9);
    let nu = Vector2::new(0.0, 1.0);
    let t = |m: &BoundaryVectorField| eval_traction_offboundary(&x, &nu, m, &c, &k).unwrap().value;
    assert!((t(&sum) - t(&m1) - t(&m2)).amax() < 1e-13);
}

#[test]
fn near_boundary_points_are_flagged() {
    let c = curve(&circle(), 64);
    let k = kernel(1.0, 1e-10);
    let mu = jump_density(&c);
    let near = Vector2::new(0.5 + 0.25 + 0.01, 0.5);
    let far = Vector2::new(0.05, 0.05);
    assert!(eval_single_layer(&near, &mu, &c, &k).unwrap().near_boundary);
    assert!(!eval_single_layer(&far, &mu, &c, &k).unwrap().near_boundary);
}

#[test]
fn boundary_integral_examples() {
    let rho = 0.25;
    let c = curve(&circle(), 64);
    let one = boundary_integral(&BoundaryVectorField::constant(&c, Vector2::new(1.0, 0.0)), &c).unwrap();
    assert!((one - Vector2::new(2.0 * PI * rho, 0.0)).amax() < 1e-14);
    let cos = BoundaryVectorField::from_fn(&c, |p| Vector2::new(p.t.cos(), 0.0));
    assert!(boundary_integral(&cos, &c).unwrap().amax() < 1e-15);

    let e = curve(&ellipse(), 64);
    let mu = random_trig_density(&e, 11);
    let coarse = boundary_integral(&mu, &e).unwrap();
    let fine_curve = e.refined(8);
    let interp = mu.interpolant(&e);
    let fine = boundary_integral(
        &BoundaryVectorField::from_fn(&fine_curve, |p| Vector2::new(interp[0].eval(p.t), interp[1].eval(p.t))),
        &fine_curve,
    )
    .unwrap();
    assert!((coarse - fine).amax() < 1e-12);
}

#[test]
fn constant_density_weights_are_consistent() {
    let c = curve(&ellipse(), 128);
    let k = kernel(1.0, 1e-12);
    let ops = assemble_operators(&c, &k).unwrap();
    let mu = BoundaryVectorField::constant(&c, Vector2::new(0.0, 1.0));
    let via_operator = boundary_integral(&ops.single_layer.apply(&mu).unwrap(), &c).unwrap();
    // same integral by the smooth rule on a refined curve
    let fine = c.refined(4);
    let fine_ops = assemble_single_layer(&fine, &k).unwrap();
    let fine_mu = BoundaryVectorField::constant(&fine, Vector2::new(0.0, 1.0));
    let via_fine = boundary_integral(&fine_ops.apply(&fine_mu).unwrap(), &fine).unwrap();
    assert!((via_operator - via_fine).amax() < 1e-12);
}

#[test]
fn kernel_split_recombines() {
    for shape in [circle(), ellipse()] {
        let c = curve(&shape, 64);
        assert!(kernel_split_error(&c, &kernel(0.7, 1e-12), 30, 6).unwrap() < 1e-12);
    }
}

mod common;

use common::*;
use nxfem::norms::{compute_errors, compute_errors_refined, least_squares_rate};
use nxfem::quadrature::subdivided_polygon_rule;
use nxfem::registry::{build, example1, example2, patch, ExampleKind, MU1_SWEEP};
use nxfem::spaces::{interpolate_velocity, project_pressure, DiscreteField};
use nxfem::study::{run_study, solve_level, StudyConfig};
use nxfem::{Side, Vec2};

#[test]
fn patch_test_is_reproduced() {
    let ex = patch::<f64>();
    for n in [8, 16] {
        let l = solve_level(&ex, n).unwrap();
        let u = interpolate_velocity(&l.mesh, &l.dofs, |s, x| ex.exact.velocity(s, x));
        let du = l.solution.field.velocity.iter().zip(&u).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(du < 1e-9, "n={n}: velocity off by {du}");
        assert!(max_abs(&l.solution.field.pressure) < 1e-9);
    }
}

#[test]
fn repeated_runs_are_bitwise_identical() {
    let config = StudyConfig { example: ExampleKind::Example2, n_list: vec![8, 16], ..Default::default() };
    let a = run_study(&config).unwrap().csv();
    let b = run_study(&config).unwrap().csv();
    assert_eq!(a, b);
}

fn interpolant(l: &nxfem::LevelOutcome, ex: &nxfem::Example) -> DiscreteField<f64> {
    DiscreteField {
        velocity: interpolate_velocity(&l.mesh, &l.dofs, |s, x| ex.exact.velocity(s, x)),
        pressure: project_pressure(&l.mesh, &l.dofs, |s, x| ex.exact.pressure(s, x)),
    }
}

#[test]
fn interpolation_errors_decay_at_first_order() {
    let (ex1, ex2) = (example1::<f64>(), example2::<f64>(1000.0, 1.0));
    let (mut hs, mut e1, mut ep) = (vec![], vec![], vec![]);
    for n in [8, 16, 32, 64] {
        let l1 = solve_level(&ex1, n).unwrap();
        let r1 =
            compute_errors(&l1.mesh, &l1.geometry, &l1.dofs, &interpolant(&l1, &ex1), ex1.exact.as_ref(), &ex1.params)
                .unwrap();
        let l2 = solve_level(&ex2, n).unwrap();
        let r2 =
            compute_errors(&l2.mesh, &l2.geometry, &l2.dofs, &interpolant(&l2, &ex2), ex2.exact.as_ref(), &ex2.params)
                .unwrap();
        hs.push(r1.h);
        e1.push(r1.e1_u);
        ep.push(r2.e0_p);
    }
    let r1 = least_squares_rate(&hs, &e1).unwrap();
    let rp = least_squares_rate(&hs, &ep).unwrap();
    assert!((0.9..1.1).contains(&r1), "energy interpolation rate {r1}");
    assert!((0.9..1.1).contains(&rp), "pressure projection rate {rp}");
}

#[test]
fn discrete_error_is_within_a_fixed_factor_of_interpolation() {
    for ex in [example1::<f64>(), example2(1000.0, 1.0)] {
        for n in [16, 32, 64] {
            let l = solve_level(&ex, n).unwrap();
            let i = compute_errors(&l.mesh, &l.geometry, &l.dofs, &interpolant(&l, &ex), ex.exact.as_ref(), &ex.params)
                .unwrap();
            let ratio = l.report.e1_u / i.e1_u;
            assert!((1.0..4.0).contains(&ratio), "{} n={n}: ratio {ratio}", ex.kind);
        }
    }
}

#[test]
fn example2_pressure_has_zero_weighted_mean() {
    let ex = example2::<f64>(1000.0, 1.0);
    let s = circle_setup(32);
    let mut total = 0.0;
    for k in 0..s.mesh.num_triangles() {
        for side in Side::BOTH {
            if let Some(poly) = s.geo.piece(&s.mesh, k, side) {
                let rule = subdivided_polygon_rule(&poly, 5, 1).unwrap();
                total += rule.integrate(|x| ex.exact.pressure(side, x) / ex.params.mu(side));
            }
        }
    }
    assert!(total.abs() < 1e-12, "{total}");
}

#[test]
fn error_quadrature_is_converged() {
    for ex in [example1::<f64>(), example2(1000.0, 1.0)] {
        let l = solve_level(&ex, 16).unwrap();
        let fine =
            compute_errors_refined(&l.mesh, &l.geometry, &l.dofs, &l.solution.field, ex.exact.as_ref(), &ex.params, 2)
                .unwrap();
        let e = l.report;
        for (a, b) in [(e.e0_u, fine.e0_u), (e.e1_u, fine.e1_u), (e.e0_p, fine.e0_p)] {
            assert!(relative_gap(a, b) < 1e-4, "{} {a} vs {b}", ex.kind);
        }
    }
}

#[test]
fn phase_errors_do_not_depend_on_viscosity_contrast() {
    for side in Side::BOTH {
        let errs: Vec<[f64; 3]> = MU1_SWEEP
            .iter()
            .map(|&mu1| {
                let ex = build(ExampleKind::Example2, Some(mu1), None);
                phase_errors(&solve_level(&ex, 32).unwrap(), &ex, side)
            })
            .collect();
        for c in [0, 2] {
            let (lo, hi) = errs.iter().fold((f64::MAX, 0.0f64), |(lo, hi), e| (lo.min(e[c]), hi.max(e[c])));
            assert!(hi / lo - 1.0 < 0.05, "{side:?} column {c}: {errs:?}");
        }
    }
}

#[test]
fn shifted_interfaces_solve() {
    let h = 1.0 / 16.0;
    let mut e1 = vec![];
    for (dx, dy) in [(0.1, 0.7), (0.55, 0.25), (0.9, 0.95), (0.33, 0.01)] {
        let ex = example2::<f64>(1000.0, 1.0).with_center(Vec2::new(dx * h, dy * h));
        e1.push(solve_level(&ex, 32).unwrap().report.e1_u);
    }
    let (lo, hi) = e1.iter().fold((f64::MAX, 0.0f64), |(lo, hi), &e| (lo.min(e), hi.max(e)));
    assert!(hi / lo < 1.2, "{e1:?}");
}

//! Helpers shared by the integration tests and the acceptance runner.
#![allow(dead_code)]

use nxfem::assembly::{assemble_forms, Forms, NoLoad};
use nxfem::geometry::{classify, InterfaceGeometry};
use nxfem::level_set::{Circle, LevelSet};
use nxfem::mesh::{build_structured_mesh, Mesh, Rectangle};
use nxfem::norms::compute_errors;
use nxfem::quadrature::{polygon_rule, segment_rule};
use nxfem::spaces::{DiscreteField, DofMap};
use nxfem::vec2::{mat2_apply, mat2_ddot, Mat2, Vec2};
use nxfem::{PhysicalParams, Side};
use rand::Rng;

pub struct Setup {
    pub mesh: Mesh<f64>,
    pub geo: InterfaceGeometry<f64>,
    pub dofs: DofMap,
}

pub fn setup(n: usize, ls: &dyn LevelSet<f64>) -> Setup {
    let mesh = build_structured_mesh(Rectangle::symmetric_unit(), n).unwrap();
    let geo = classify(&mesh, ls).unwrap();
    let dofs = DofMap::new(&mesh, &geo);
    Setup { mesh, geo, dofs }
}

pub fn circle_setup(n: usize) -> Setup {
    setup(n, &Circle::new(Vec2::new(0.0, 0.0), 0.5))
}

pub fn random_field(dofs: &DofMap, rng: &mut impl Rng) -> DiscreteField<f64> {
    DiscreteField {
        velocity: (0..dofs.n_u()).map(|_| rng.random_range(-1.0..1.0)).collect(),
        pressure: (0..dofs.n_p()).map(|_| rng.random_range(-1.0..1.0)).collect(),
    }
}

pub fn forms(s: &Setup, params: &PhysicalParams) -> Forms<f64> {
    assemble_forms(&s.mesh, &s.geo, &s.dofs, params, &NoLoad).unwrap()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `B_h[(u, p), (v, q)]` from the assembled blocks.
pub fn matrix_form(f: &Forms<f64>, x: &DiscreteField<f64>, y: &DiscreteField<f64>) -> f64 {
    f.a.bilinear(&y.velocity, &x.velocity) + f.b.bilinear(&x.pressure, &y.velocity)
        - f.b.bilinear(&y.pressure, &x.velocity)
        + f.j_p.bilinear(&y.pressure, &x.pressure)
}

fn sub(a: Mat2<f64>, b: Mat2<f64>) -> Mat2<f64> {
    [[a[0][0] - b[0][0], a[0][1] - b[0][1]], [a[1][0] - b[1][0], a[1][1] - b[1][1]]]
}

fn div(g: Mat2<f64>) -> f64 {
    g[0][0] + g[1][1]
}

/// `B_h[(u, p), (v, q)]` evaluated term by term from the discrete fields
/// by quadrature, without the element matrices.
pub fn direct_form(s: &Setup, params: &PhysicalParams, x: &DiscreteField<f64>, y: &DiscreteField<f64>) -> f64 {
    let (mesh, geo, dofs) = (&s.mesh, &s.geo, &s.dofs);
    let mut total = 0.0;

    // Broken volume terms.
    for k in 0..mesh.num_triangles() {
        for side in Side::BOTH {
            let Some(poly) = geo.piece(mesh, k, side) else { continue };
            let mu = params.mu(side);
            let (gu, gv) = (x.velocity_gradient(mesh, dofs, k, side), y.velocity_gradient(mesh, dofs, k, side));
            let (p, q) = (x.pressure_on(dofs, k, side), y.pressure_on(dofs, k, side));
            total +=
                polygon_rule(&poly, 2).unwrap().integrate(|_| mu * mat2_ddot(&gu, &gv) - p * div(gv) + q * div(gu));
        }
    }

    // Interface Nitsche terms on every chord.
    let pen0 = params.gamma0 * params.mu_harmonic() / mesh.h();
    for cut in geo.cut_elements() {
        let k = cut.element;
        let n = cut.normal;
        let flux = |f: &DiscreteField<f64>| {
            Side::BOTH
                .map(|sd| mat2_apply(&f.velocity_gradient(mesh, dofs, k, sd), n) * (params.weight(sd) * params.mu(sd)))
                .into_iter()
                .fold(Vec2::zero(), |a, b| a + b)
        };
        let avg_p = |f: &DiscreteField<f64>| {
            Side::BOTH.iter().map(|&sd| params.weight(sd) * f.pressure_on(dofs, k, sd)).sum::<f64>()
        };
        let (fu, fv, pu, qv) = (flux(x), flux(y), avg_p(x), avg_p(y));
        let rule = segment_rule(cut.points[0], cut.points[1], 4).unwrap();
        total += rule.integrate(|pt| {
            let ju = x.velocity_at(mesh, dofs, k, Side::One, pt) - x.velocity_at(mesh, dofs, k, Side::Two, pt);
            let jv = y.velocity_at(mesh, dofs, k, Side::One, pt) - y.velocity_at(mesh, dofs, k, Side::Two, pt);
            -fu.dot(jv) - fv.dot(ju) + pen0 * ju.dot(jv) + pu * jv.dot(n) - qv * ju.dot(n)
        });
    }

    for side in Side::BOTH {
        let mu = params.mu(side);
        // Nitsche coupling and stabilization across cut edge segments.
        for seg in &geo.side(side).cut_segments {
            let (l, r, n) = (seg.left, seg.right, seg.normal);
            let grad = |f: &DiscreteField<f64>, k| f.velocity_gradient(mesh, dofs, k, side);
            let flux = |f: &DiscreteField<f64>| (mat2_apply(&grad(f, l), n) + mat2_apply(&grad(f, r), n)) * (0.5 * mu);
            let avg = |f: &DiscreteField<f64>| 0.5 * (f.pressure_on(dofs, l, side) + f.pressure_on(dofs, r, side));
            let jump = |f: &DiscreteField<f64>, pt| {
                f.velocity_at(mesh, dofs, l, side, pt) - f.velocity_at(mesh, dofs, r, side, pt)
            };
            let pen = params.gamma[side.index()] * mu / seg.length;
            let (fu, fv, pu, qv) = (flux(x), flux(y), avg(x), avg(y));
            total += segment_rule(seg.a, seg.b, 4).unwrap().integrate(|pt| {
                let (ju, jv) = (jump(x, pt), jump(y, pt));
                -fu.dot(jv) - fv.dot(ju) + pen * ju.dot(jv) + pu * jv.dot(n) - qv * ju.dot(n)
            });
            let (du, dv) = (sub(grad(x, l), grad(x, r)), sub(grad(y, l), grad(y, r)));
            total += mu * seg.length * seg.length * mat2_apply(&du, n).dot(mat2_apply(&dv, n));
            let (pj, qj) = (
                x.pressure_on(dofs, l, side) - x.pressure_on(dofs, r, side),
                y.pressure_on(dofs, l, side) - y.pressure_on(dofs, r, side),
            );
            total += seg.length * seg.length / mu * pj * qj;
        }
        // Ghost penalties on full edges.
        for &e in &geo.side(side).ghost_edges {
            let [Some(l), Some(r)] = mesh.edges()[e].triangles else { unreachable!() };
            let len = mesh.edge_length(e);
            let grad = |f: &DiscreteField<f64>, k| f.velocity_gradient(mesh, dofs, k, side);
            let (du, dv) = (sub(grad(x, l), grad(x, r)), sub(grad(y, l), grad(y, r)));
            total += mu * len * len * mat2_ddot(&du, &dv);
            let (pj, qj) = (
                x.pressure_on(dofs, l, side) - x.pressure_on(dofs, r, side),
                y.pressure_on(dofs, l, side) - y.pressure_on(dofs, r, side),
            );
            total += len * len / mu * pj * qj;
        }
    }
    total
}

pub fn relative_gap(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-300)
}

/// Max of `|x_i|`.
pub fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

pub fn inner(a: &[f64], b: &[f64]) -> f64 {
    dot(a, b)
}

/// Errors emphasizing one phase through a negligible viscosity on the
/// other. The velocity error is unweighted and the pressure error weighted
/// by `μ⁻¹`, so only `e1_u` sees `side`; `e0_p` sees the opposite phase.
pub fn phase_errors(l: &nxfem::LevelOutcome, ex: &nxfem::Example, side: Side) -> [f64; 3] {
    let weights = match side {
        Side::One => (1.0, 1e-14),
        Side::Two => (1e-14, 1.0),
    };
    let params = PhysicalParams::new(weights.0, weights.1);
    let r = compute_errors(&l.mesh, &l.geometry, &l.dofs, &l.solution.field, ex.exact.as_ref(), &params).unwrap();
    [r.e1_u, r.e0_u, r.e0_p]
}

/// `(max − min) / min`.
pub fn spread(values: &[f64]) -> f64 {
    let (lo, hi) = values.iter().fold((f64::MAX, f64::MIN), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    (hi - lo) / lo
}

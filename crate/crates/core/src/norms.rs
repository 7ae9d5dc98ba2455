//! Relative errors against exact solutions and convergence rates.

use crate::assembly::{LoadData, PhysicalParams};
use crate::error::{Error, Result};
use crate::geometry::{InterfaceGeometry, Side};
use crate::mesh::Mesh;
use crate::quadrature::{subdivided_polygon_rule, ERROR_DEGREE};
use crate::spaces::{DiscreteField, DofMap};
use crate::vec2::{mat2_ddot, Mat2, Vec2};
use crate::Real;

/// Manufactured solution given by one closed-form formula per phase.
pub trait ExactSolution<T: Real>: Sync {
    fn name(&self) -> &str;

    fn velocity(&self, side: Side, x: Vec2<T>) -> Vec2<T>;

    /// Row `c` is the gradient of component `c`.
    fn velocity_gradient(&self, side: Side, x: Vec2<T>) -> Mat2<T>;

    fn pressure(&self, side: Side, x: Vec2<T>) -> T;

    fn body_force(&self, side: Side, x: Vec2<T>) -> Vec2<T>;

    fn interface_traction(&self, _x: Vec2<T>) -> T {
        T::zero()
    }
}

/// Load data of an exact solution: its force, traction and boundary trace.
pub struct ExactLoad<'a, T>(pub &'a dyn ExactSolution<T>);

impl<T: Real> LoadData<T> for ExactLoad<'_, T> {
    fn body_force(&self, side: Side, x: Vec2<T>) -> Vec2<T> {
        self.0.body_force(side, x)
    }

    fn interface_traction(&self, x: Vec2<T>) -> T {
        self.0.interface_traction(x)
    }

    fn dirichlet(&self, side: Side, x: Vec2<T>) -> Vec2<T> {
        self.0.velocity(side, x)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ErrorReport<T> {
    pub h: T,
    /// `‖u − u_h‖ / ‖u‖`.
    pub e0_u: T,
    /// `|μ^{1/2}(u − u_h)|_{1,h} / |μ^{1/2}u|_{1,h}`.
    pub e1_u: T,
    /// `‖μ^{-1/2}(p − p_h)‖ / ‖μ^{-1/2}p‖` after the gauge shift.
    pub e0_p: T,
}

/// Squared norms accumulated over all pieces `K ∩ Ωᵢ`.
#[derive(Clone, Copy, Debug, Default)]
struct Sums<T> {
    u_err: T,
    u_ref: T,
    grad_err: T,
    grad_ref: T,
    p_err: T,
    p_ref: T,
}

fn sums<T: Real>(
    mesh: &Mesh<T>,
    geo: &InterfaceGeometry<T>,
    dofs: &DofMap,
    field: &DiscreteField<T>,
    exact: &dyn ExactSolution<T>,
    params: &PhysicalParams<T>,
    levels: u32,
) -> Result<Sums<T>> {
    // Gauge: shift p_h by s so that (μ⁻¹(p − p_h − s), 1) = 0.
    let mut shift_num = T::zero();
    let mut shift_den = T::zero();
    let mut pieces = Vec::new();
    for k in 0..mesh.num_triangles() {
        for side in Side::BOTH {
            if geo.piece_area(mesh, k, side) <= T::zero() {
                continue;
            }
            let poly = geo.piece(mesh, k, side).expect("piece with positive area");
            let rule = subdivided_polygon_rule(&poly, ERROR_DEGREE, levels)?;
            let inv_mu = params.mu(side).recip();
            let ph = field.pressure_on(dofs, k, side);
            for (x, w) in rule.iter() {
                shift_num += w * inv_mu * (exact.pressure(side, x) - ph);
                shift_den += w * inv_mu;
            }
            pieces.push((k, side, rule));
        }
    }
    let shift = shift_num / shift_den;

    let mut s = Sums {
        u_err: T::zero(),
        u_ref: T::zero(),
        grad_err: T::zero(),
        grad_ref: T::zero(),
        p_err: T::zero(),
        p_ref: T::zero(),
    };
    for (k, side, rule) in pieces {
        let mu = params.mu(side);
        let gh = field.velocity_gradient(mesh, dofs, k, side);
        let ph = field.pressure_on(dofs, k, side) + shift;
        for (x, w) in rule.iter() {
            let u = exact.velocity(side, x);
            let du = u - field.velocity_at(mesh, dofs, k, side, x);
            s.u_err += w * du.norm_squared();
            s.u_ref += w * u.norm_squared();
            let g = exact.velocity_gradient(side, x);
            let dg = [[g[0][0] - gh[0][0], g[0][1] - gh[0][1]], [g[1][0] - gh[1][0], g[1][1] - gh[1][1]]];
            s.grad_err += w * mu * mat2_ddot(&dg, &dg);
            s.grad_ref += w * mu * mat2_ddot(&g, &g);
            let p = exact.pressure(side, x);
            s.p_err += w * (p - ph) * (p - ph) / mu;
            s.p_ref += w * p * p / mu;
        }
    }
    Ok(s)
}

fn ratio<T: Real>(num: T, den: T) -> T {
    if den > T::zero() {
        (num / den).sqrt()
    } else {
        num.sqrt()
    }
}

/// Relative errors of `field` with integrals over every `K ∩ Ωᵢ`.
/// When a reference norm vanishes the absolute error is reported.
pub fn compute_errors<T: Real>(
    mesh: &Mesh<T>,
    geo: &InterfaceGeometry<T>,
    dofs: &DofMap,
    field: &DiscreteField<T>,
    exact: &dyn ExactSolution<T>,
    params: &PhysicalParams<T>,
) -> Result<ErrorReport<T>> {
    compute_errors_refined(mesh, geo, dofs, field, exact, params, 0)
}

/// As [`compute_errors`], with every quadrature triangle split into
/// `4^levels` pieces.
pub fn compute_errors_refined<T: Real>(
    mesh: &Mesh<T>,
    geo: &InterfaceGeometry<T>,
    dofs: &DofMap,
    field: &DiscreteField<T>,
    exact: &dyn ExactSolution<T>,
    params: &PhysicalParams<T>,
    levels: u32,
) -> Result<ErrorReport<T>> {
    let s = sums(mesh, geo, dofs, field, exact, params, levels)?;
    Ok(ErrorReport {
        h: mesh.spacing(),
        e0_u: ratio(s.u_err, s.u_ref),
        e1_u: ratio(s.grad_err, s.grad_ref),
        e0_p: ratio(s.p_err, s.p_ref),
    })
}

/// Squared jump terms of the discrete energy norm of a velocity field:
/// `Σ_Γ {μ}_w/h ‖[v]‖²`, `Σ_ẽ μᵢ/|ẽ| ‖[v]‖²` and `J_u(v, v)`, plus the
/// broken `Σ μᵢ‖∇v‖²`. Diagnostic only.
pub fn energy_norm_squared<T: Real>(
    mesh: &Mesh<T>,
    geo: &InterfaceGeometry<T>,
    dofs: &DofMap,
    field: &DiscreteField<T>,
    params: &PhysicalParams<T>,
) -> T {
    use crate::quadrature::{segment_rule, SEGMENT_DEGREE};
    let mut total = T::zero();
    for k in 0..mesh.num_triangles() {
        for side in Side::BOTH {
            let g = field.velocity_gradient(mesh, dofs, k, side);
            total += params.mu(side) * geo.piece_area(mesh, k, side) * mat2_ddot(&g, &g);
        }
    }
    for cut in geo.cut_elements() {
        let k = cut.element;
        let rule = segment_rule(cut.points[0], cut.points[1], SEGMENT_DEGREE).expect("positive chord");
        for (x, w) in rule.iter() {
            let jump = field.velocity_at(mesh, dofs, k, Side::One, x) - field.velocity_at(mesh, dofs, k, Side::Two, x);
            total += w * params.mu_harmonic() / mesh.h() * jump.norm_squared();
        }
    }
    for side in Side::BOTH {
        let mu = params.mu(side);
        for seg in &geo.side(side).cut_segments {
            let rule = segment_rule(seg.a, seg.b, SEGMENT_DEGREE).expect("positive segment");
            for (x, w) in rule.iter() {
                let jump = field.velocity_at(mesh, dofs, seg.left, side, x)
                    - field.velocity_at(mesh, dofs, seg.right, side, x);
                total += w * mu / seg.length * jump.norm_squared();
            }
            let (gl, gr) = (
                field.velocity_gradient(mesh, dofs, seg.left, side),
                field.velocity_gradient(mesh, dofs, seg.right, side),
            );
            let d = [[gl[0][0] - gr[0][0], gl[0][1] - gr[0][1]], [gl[1][0] - gr[1][0], gl[1][1] - gr[1][1]]];
            let dn = crate::vec2::mat2_apply(&d, seg.normal);
            total += mu * seg.length * seg.length * dn.norm_squared();
        }
        for &e in &geo.side(side).ghost_edges {
            let [Some(l), Some(r)] = mesh.edges()[e].triangles else { continue };
            let (gl, gr) = (field.velocity_gradient(mesh, dofs, l, side), field.velocity_gradient(mesh, dofs, r, side));
            let d = [[gl[0][0] - gr[0][0], gl[0][1] - gr[0][1]], [gl[1][0] - gr[1][0], gl[1][1] - gr[1][1]]];
            let len = mesh.edge_length(e);
            total += mu * len * len * mat2_ddot(&d, &d);
        }
    }
    total
}

fn check_decreasing<T: Real>(hs: &[T]) -> Result<()> {
    if let Some(i) = (1..hs.len()).find(|&i| !(hs[i] < hs[i - 1])) {
        return Err(Error::NonMonotoneMeshSizes(format!(
            "h[{}] = {} does not decrease from h[{}] = {}",
            i,
            hs[i],
            i - 1,
            hs[i - 1]
        )));
    }
    Ok(())
}

/// `log(e_{k-1}/e_k) / log(h_{k-1}/h_k)`; the first level has no rate.
pub fn rates<T: Real>(hs: &[T], errors: &[T]) -> Result<Vec<Option<T>>> {
    if hs.len() != errors.len() {
        return Err(Error::InvalidInput(format!("{} mesh sizes for {} errors", hs.len(), errors.len())));
    }
    check_decreasing(hs)?;
    Ok((0..hs.len()).map(|i| (i > 0).then(|| (errors[i - 1] / errors[i]).ln() / (hs[i - 1] / hs[i]).ln())).collect())
}

/// Least-squares slope of `log e` against `log h`.
pub fn least_squares_rate<T: Real>(hs: &[T], errors: &[T]) -> Result<T> {
    if hs.len() != errors.len() || hs.len() < 2 {
        return Err(Error::InvalidInput(format!(
            "least-squares rate needs at least two matching levels, got {} and {}",
            hs.len(),
            errors.len()
        )));
    }
    check_decreasing(hs)?;
    let n = T::from_count(hs.len());
    let xs: Vec<T> = hs.iter().map(|h| h.ln()).collect();
    let ys: Vec<T> = errors.iter().map(|e| e.ln()).collect();
    let mx = xs.iter().fold(T::zero(), |a, &b| a + b) / n;
    let my = ys.iter().fold(T::zero(), |a, &b| a + b) / n;
    let (mut sxy, mut sxx) = (T::zero(), T::zero());
    for (&x, &y) in xs.iter().zip(&ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
    }
    Ok(sxy / sxx)
}

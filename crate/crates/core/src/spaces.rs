//! Doubled Crouzeix–Raviart velocity and P0 pressure spaces.
//!
//! Each phase owns a copy of the CR space on the elements meeting it, so an
//! edge of a cut element carries one velocity unknown per component and
//! phase, and a cut element carries two pressures.

use crate::geometry::{InterfaceGeometry, Side};
use crate::mesh::Mesh;
use crate::quadrature::{map_to_triangle, segment_rule, triangle_rule, SEGMENT_DEGREE, VOLUME_DEGREE};
use crate::vec2::{Mat2, Vec2};
use crate::Real;

/// Value and gradient of the CR basis function attached to local edge `m`
/// (opposite local vertex `m`) of element `k` at `x`.
pub fn cr_basis<T: Real>(mesh: &Mesh<T>, k: usize, m: usize, x: Vec2<T>) -> (T, Vec2<T>) {
    let lambda = mesh.barycentric(k, x);
    let grad = mesh.barycentric_gradients(k)[m];
    let two = T::lit(2.0);
    (T::one() - two * lambda[m], grad * -two)
}

/// Gradients of the three CR basis functions of element `k`.
pub fn cr_gradients<T: Real>(mesh: &Mesh<T>, k: usize) -> [Vec2<T>; 3] {
    mesh.barycentric_gradients(k).map(|g| g * T::lit(-2.0))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DofMap {
    edge_local: [Vec<Option<usize>>; 2],
    element_local: [Vec<Option<usize>>; 2],
    u_offset: [usize; 2],
    p_offset: [usize; 2],
    n_u: usize,
    n_p: usize,
    dirichlet: Vec<bool>,
    velocity_owner: Vec<(Side, usize)>,
    pressure_owner: Vec<(Side, usize)>,
}

impl DofMap {
    /// Numbers phase-1 velocities, then phase-2 velocities; pressures
    /// likewise in a separate index space. Within a phase edges and
    /// elements keep ascending mesh order.
    pub fn new<T: Real>(mesh: &Mesh<T>, geo: &InterfaceGeometry<T>) -> Self {
        let mut edge_local = [vec![None; mesh.num_edges()], vec![None; mesh.num_edges()]];
        let mut element_local = [vec![None; mesh.num_triangles()], vec![None; mesh.num_triangles()]];
        let mut u_offset = [0; 2];
        let mut p_offset = [0; 2];
        let (mut n_u, mut n_p) = (0, 0);
        let mut dirichlet = Vec::new();
        let mut velocity_owner = Vec::new();
        let mut pressure_owner = Vec::new();
        for side in Side::BOTH {
            let s = side.index();
            let sets = geo.side(side);
            u_offset[s] = n_u;
            for (i, &e) in sets.edges.iter().enumerate() {
                edge_local[s][e] = Some(i);
                let boundary = mesh.is_boundary_edge(e);
                for _ in 0..2 {
                    dirichlet.push(boundary);
                    velocity_owner.push((side, e));
                }
            }
            n_u += 2 * sets.edges.len();
            p_offset[s] = n_p;
            for (i, &k) in sets.elements.iter().enumerate() {
                element_local[s][k] = Some(i);
                pressure_owner.push((side, k));
            }
            n_p += sets.elements.len();
        }
        Self { edge_local, element_local, u_offset, p_offset, n_u, n_p, dirichlet, velocity_owner, pressure_owner }
    }

    pub fn n_u(&self) -> usize {
        self.n_u
    }

    pub fn n_p(&self) -> usize {
        self.n_p
    }

    /// Global index of component `comp` on edge `e` for phase `side`.
    pub fn velocity(&self, side: Side, e: usize, comp: usize) -> Option<usize> {
        self.edge_local[side.index()][e].map(|i| self.u_offset[side.index()] + 2 * i + comp)
    }

    pub fn pressure(&self, side: Side, k: usize) -> Option<usize> {
        self.element_local[side.index()][k].map(|i| self.p_offset[side.index()] + i)
    }

    /// `[local edge][component]` velocity indices of element `k` in phase
    /// `side`, if the element meets that phase.
    pub fn element_velocity<T: Real>(&self, mesh: &Mesh<T>, k: usize, side: Side) -> Option<[[usize; 2]; 3]> {
        self.element_local[side.index()][k]?;
        let refs = mesh.triangle_edges(k);
        let mut out = [[0; 2]; 3];
        for (m, r) in refs.iter().enumerate() {
            for c in 0..2 {
                out[m][c] = self.velocity(side, r.edge, c)?;
            }
        }
        Some(out)
    }

    pub fn is_dirichlet(&self, dof: usize) -> bool {
        self.dirichlet[dof]
    }

    pub fn dirichlet_flags(&self) -> &[bool] {
        &self.dirichlet
    }

    /// Phase and edge a velocity index belongs to.
    pub fn velocity_owner(&self, dof: usize) -> (Side, usize) {
        self.velocity_owner[dof]
    }

    /// Phase and element a pressure index belongs to.
    pub fn pressure_owner(&self, dof: usize) -> (Side, usize) {
        self.pressure_owner[dof]
    }
}

/// Coefficients of a discrete velocity/pressure pair.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteField<T> {
    pub velocity: Vec<T>,
    pub pressure: Vec<T>,
}

impl<T: Real> DiscreteField<T> {
    pub fn zeros(dofs: &DofMap) -> Self {
        Self { velocity: vec![T::zero(); dofs.n_u()], pressure: vec![T::zero(); dofs.n_p()] }
    }

    /// Phase-`side` velocity polynomial of element `k` evaluated at `x`.
    /// Zero when the element does not meet the phase.
    pub fn velocity_at(&self, mesh: &Mesh<T>, dofs: &DofMap, k: usize, side: Side, x: Vec2<T>) -> Vec2<T> {
        let Some(idx) = dofs.element_velocity(mesh, k, side) else {
            return Vec2::zero();
        };
        let lambda = mesh.barycentric(k, x);
        let mut u = Vec2::zero();
        for m in 0..3 {
            let phi = T::one() - T::lit(2.0) * lambda[m];
            u += Vec2::new(self.velocity[idx[m][0]], self.velocity[idx[m][1]]) * phi;
        }
        u
    }

    /// Constant gradient of the phase-`side` velocity on element `k`;
    /// row `c` is the gradient of component `c`.
    pub fn velocity_gradient(&self, mesh: &Mesh<T>, dofs: &DofMap, k: usize, side: Side) -> Mat2<T> {
        let mut g = [[T::zero(); 2]; 2];
        let Some(idx) = dofs.element_velocity(mesh, k, side) else {
            return g;
        };
        let grads = cr_gradients(mesh, k);
        for m in 0..3 {
            for (c, row) in g.iter_mut().enumerate() {
                let v = self.velocity[idx[m][c]];
                row[0] += v * grads[m].x;
                row[1] += v * grads[m].y;
            }
        }
        g
    }

    pub fn pressure_on(&self, dofs: &DofMap, k: usize, side: Side) -> T {
        dofs.pressure(side, k).map_or(T::zero(), |i| self.pressure[i])
    }

    /// Velocity and pressure at `x` in element `k`, taken from the phase
    /// containing `x`.
    pub fn eval(
        &self,
        mesh: &Mesh<T>,
        geo: &InterfaceGeometry<T>,
        dofs: &DofMap,
        k: usize,
        x: Vec2<T>,
    ) -> (Vec2<T>, T) {
        let side = geo.side_of_point(k, x);
        (self.velocity_at(mesh, dofs, k, side, x), self.pressure_on(dofs, k, side))
    }
}

/// CR interpolant: every edge unknown is the mean over the full edge of
/// the phase formula `u(side, x)`.
pub fn interpolate_velocity<T: Real>(mesh: &Mesh<T>, dofs: &DofMap, u: impl Fn(Side, Vec2<T>) -> Vec2<T>) -> Vec<T> {
    let mut out = vec![T::zero(); dofs.n_u()];
    for e in 0..mesh.num_edges() {
        let [a, b] = mesh.edge_vertices(e);
        let rule = segment_rule(a, b, SEGMENT_DEGREE).expect("mesh edges have positive length");
        let len = mesh.edge_length(e);
        for side in Side::BOTH {
            if dofs.velocity(side, e, 0).is_none() {
                continue;
            }
            let mut mean = Vec2::zero();
            for (x, w) in rule.iter() {
                mean += u(side, x) * w;
            }
            mean = mean * len.recip();
            for c in 0..2 {
                out[dofs.velocity(side, e, c).unwrap()] = mean.component(c);
            }
        }
    }
    out
}

/// Element means over the full element of the phase formula `p(side, x)`.
pub fn project_pressure<T: Real>(mesh: &Mesh<T>, dofs: &DofMap, p: impl Fn(Side, Vec2<T>) -> T) -> Vec<T> {
    let reference = triangle_rule::<T>(VOLUME_DEGREE).expect("supported degree");
    let mut out = vec![T::zero(); dofs.n_p()];
    for k in 0..mesh.num_triangles() {
        let rule = map_to_triangle(&reference, mesh.triangle_vertices(k));
        let area = mesh.area(k);
        for side in Side::BOTH {
            if let Some(i) = dofs.pressure(side, k) {
                out[i] = rule.integrate(|x| p(side, x)) / area;
            }
        }
    }
    out
}

/// Boundary values of the Dirichlet unknowns (edge means of `g`); entries
/// of free unknowns are zero.
pub fn apply_dirichlet<T: Real>(mesh: &Mesh<T>, dofs: &DofMap, g: impl Fn(Side, Vec2<T>) -> Vec2<T>) -> Vec<T> {
    let mut out = vec![T::zero(); dofs.n_u()];
    for e in (0..mesh.num_edges()).filter(|&e| mesh.is_boundary_edge(e)) {
        let [a, b] = mesh.edge_vertices(e);
        let rule = segment_rule(a, b, SEGMENT_DEGREE).expect("mesh edges have positive length");
        let len = mesh.edge_length(e);
        for side in Side::BOTH {
            if dofs.velocity(side, e, 0).is_none() {
                continue;
            }
            let mut mean = Vec2::zero();
            for (x, w) in rule.iter() {
                mean += g(side, x) * w;
            }
            for c in 0..2 {
                out[dofs.velocity(side, e, c).unwrap()] = mean.component(c) / len;
            }
        }
    }
    out
}

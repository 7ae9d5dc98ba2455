//! Assembly of the discrete saddle-point system.
//!
//! Gradients and pressures are elementwise constant, so volume terms are
//! integrated exactly through piece areas; every line integral uses the
//! segment rule. Local matrices are filled on the upper triangle and
//! mirrored, which makes the symmetric blocks bitwise symmetric.

use crate::error::{Error, Result};
use crate::geometry::{CutSegment, InterfaceGeometry, Side};
use crate::mesh::Mesh;
use crate::quadrature::{polygon_rule, segment_rule, QuadratureRule, SEGMENT_DEGREE, VOLUME_DEGREE};
use crate::spaces::{apply_dirichlet, cr_gradients, DofMap};
use crate::sparse::{CsrMatrix, TripletBuilder};
use crate::vec2::Vec2;
use crate::Real;

pub const DEFAULT_PENALTY: f64 = 10.0;

/// Viscosities and penalty parameters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhysicalParams<T> {
    pub mu: [T; 2],
    /// Interface penalty `γ₀`.
    pub gamma0: T,
    /// Cut-edge penalties `γ₁`, `γ₂` for the two phases.
    pub gamma: [T; 2],
}

impl<T: Real> PhysicalParams<T> {
    pub fn new(mu1: T, mu2: T) -> Self {
        let g = T::lit(DEFAULT_PENALTY);
        Self { mu: [mu1, mu2], gamma0: g, gamma: [g, g] }
    }

    pub fn with_penalties(mut self, gamma0: T, gamma1: T, gamma2: T) -> Self {
        self.gamma0 = gamma0;
        self.gamma = [gamma1, gamma2];
        self
    }

    pub fn mu(&self, side: Side) -> T {
        self.mu[side.index()]
    }

    /// Harmonic weight: `w₁ = μ₂/(μ₁+μ₂)`, `w₂ = μ₁/(μ₁+μ₂)`.
    pub fn weight(&self, side: Side) -> T {
        self.mu(side.other()) / (self.mu[0] + self.mu[1])
    }

    /// `{μ}_w = 2 μ₁ μ₂ / (μ₁ + μ₂)`.
    pub fn mu_harmonic(&self) -> T {
        T::lit(2.0) * self.mu[0] * self.mu[1] / (self.mu[0] + self.mu[1])
    }

    pub fn validate(&self) -> Result<()> {
        let ok = |v: T| v.is_finite() && v > T::zero();
        if !self.mu.iter().copied().all(ok) {
            return Err(Error::InvalidInput(format!("viscosities must be positive, got {:?}", self.mu)));
        }
        if !ok(self.gamma0) || !self.gamma.iter().copied().all(ok) {
            return Err(Error::InvalidInput(format!(
                "penalties must be positive, got {} {:?}",
                self.gamma0, self.gamma
            )));
        }
        Ok(())
    }
}

/// Right-hand side data.
pub trait LoadData<T: Real> {
    fn body_force(&self, side: Side, x: Vec2<T>) -> Vec2<T>;

    /// `σκ` on the interface.
    fn interface_traction(&self, _x: Vec2<T>) -> T {
        T::zero()
    }

    /// Boundary velocity, evaluated with the formula of the given phase.
    fn dirichlet(&self, side: Side, x: Vec2<T>) -> Vec2<T>;
}

/// Zero force, zero traction, zero boundary data.
#[derive(Clone, Copy, Debug, Default)]
pub struct NoLoad;

impl<T: Real> LoadData<T> for NoLoad {
    fn body_force(&self, _: Side, _: Vec2<T>) -> Vec2<T> {
        Vec2::zero()
    }

    fn dirichlet(&self, _: Side, _: Vec2<T>) -> Vec2<T> {
        Vec2::zero()
    }
}

/// A scalar velocity basis function (one component) seen at a point or
/// on an element: the edge it belongs to, its phase, and two coefficients
/// whose meaning depends on the term.
#[derive(Clone, Copy, Debug)]
struct Local<T> {
    side: Side,
    edge: usize,
    a: T,
    b: T,
}

#[derive(Clone, Copy, Debug)]
struct LocalVec<T> {
    side: Side,
    edge: usize,
    v: Vec2<T>,
}

fn velocity_dof(dofs: &DofMap, l: Side, e: usize, c: usize) -> usize {
    dofs.velocity(l, e, c).expect("edge of an element meeting the phase has a dof")
}

/// Adds `Σ_c scale·(pen·aᵢaⱼ − (aᵢbⱼ + bᵢaⱼ))` for both velocity components.
/// With `a` the jump and `b` the flux this is one quadrature point of a
/// symmetric Nitsche term.
fn add_nitsche<T: Real>(t: &mut TripletBuilder<T>, dofs: &DofMap, terms: &[Local<T>], scale: T, pen: T) {
    for c in 0..2 {
        for i in 0..terms.len() {
            let gi = velocity_dof(dofs, terms[i].side, terms[i].edge, c);
            for j in i..terms.len() {
                let gj = velocity_dof(dofs, terms[j].side, terms[j].edge, c);
                let (ti, tj) = (terms[i], terms[j]);
                let v = scale * (pen * ti.a * tj.a - (ti.a * tj.b + ti.b * tj.a));
                t.add(gi, gj, v);
                if i != j {
                    t.add(gj, gi, v);
                }
            }
        }
    }
}

/// Adds `Σ_c scale·(vᵢ·vⱼ)` for both velocity components.
fn add_gram<T: Real>(t: &mut TripletBuilder<T>, dofs: &DofMap, terms: &[LocalVec<T>], scale: T) {
    for c in 0..2 {
        for i in 0..terms.len() {
            let gi = velocity_dof(dofs, terms[i].side, terms[i].edge, c);
            for j in i..terms.len() {
                let gj = velocity_dof(dofs, terms[j].side, terms[j].edge, c);
                let v = scale * terms[i].v.dot(terms[j].v);
                t.add(gi, gj, v);
                if i != j {
                    t.add(gj, gi, v);
                }
            }
        }
    }
}

fn edges_of<T: Real>(mesh: &Mesh<T>, k: usize) -> [usize; 3] {
    mesh.triangle_edges(k).map(|r| r.edge)
}

fn chord_rule<T: Real>(a: Vec2<T>, b: Vec2<T>) -> QuadratureRule<T> {
    segment_rule(a, b, SEGMENT_DEGREE).expect("geometry prunes zero-length segments")
}

fn cr_values<T: Real>(mesh: &Mesh<T>, k: usize, x: Vec2<T>) -> [T; 3] {
    mesh.barycentric(k, x).map(|l| T::one() - T::lit(2.0) * l)
}

/// Volume, interface and cut-edge terms of `a_h`.
pub fn add_a_h<T: Real>(
    t: &mut TripletBuilder<T>,
    mesh: &Mesh<T>,
    geo: &InterfaceGeometry<T>,
    dofs: &DofMap,
    params: &PhysicalParams<T>,
) {
    for k in 0..mesh.num_triangles() {
        let edges = edges_of(mesh, k);
        let grads = cr_gradients(mesh, k);
        for side in Side::BOTH {
            let area = geo.piece_area(mesh, k, side);
            if area <= T::zero() {
                continue;
            }
            let terms: Vec<_> = (0..3).map(|m| LocalVec { side, edge: edges[m], v: grads[m] }).collect();
            add_gram(t, dofs, &terms, params.mu(side) * area);
        }
    }

    let pen0 = params.gamma0 * params.mu_harmonic() / mesh.h();
    for cut in geo.cut_elements() {
        let k = cut.element;
        let edges = edges_of(mesh, k);
        let grads = cr_gradients(mesh, k);
        let n = cut.normal;
        for (x, w) in chord_rule(cut.points[0], cut.points[1]).iter() {
            let phi = cr_values(mesh, k, x);
            let mut terms = Vec::with_capacity(6);
            for side in Side::BOTH {
                let flux_scale = params.weight(side) * params.mu(side);
                for m in 0..3 {
                    terms.push(Local {
                        side,
                        edge: edges[m],
                        a: side.jump_sign::<T>() * phi[m],
                        b: flux_scale * grads[m].dot(n),
                    });
                }
            }
            add_nitsche(t, dofs, &terms, w, pen0);
        }
    }

    for side in Side::BOTH {
        for seg in &geo.side(side).cut_segments {
            let mu = params.mu(side);
            let pen = params.gamma[side.index()] * mu / seg.length;
            for (x, w) in chord_rule(seg.a, seg.b).iter() {
                let terms = segment_terms(mesh, seg, x, |g, sign, phi| Local {
                    side,
                    edge: 0,
                    a: sign * phi,
                    b: T::lit(0.5) * mu * g.dot(seg.normal),
                });
                add_nitsche(t, dofs, &terms, w, pen);
            }
        }
    }
}

/// Local functionals of the side-`seg.side` basis of both neighbors of a
/// cut segment at `x`; `make(gradient, jump sign, value)`.
fn segment_terms<T: Real>(
    mesh: &Mesh<T>,
    seg: &CutSegment<T>,
    x: Vec2<T>,
    make: impl Fn(Vec2<T>, T, T) -> Local<T>,
) -> Vec<Local<T>> {
    let mut terms = Vec::with_capacity(6);
    for (k, sign) in [(seg.left, T::one()), (seg.right, -T::one())] {
        let edges = edges_of(mesh, k);
        let grads = cr_gradients(mesh, k);
        let phi = cr_values(mesh, k, x);
        for m in 0..3 {
            let mut l = make(grads[m], sign, phi[m]);
            l.side = seg.side;
            l.edge = edges[m];
            terms.push(l);
        }
    }
    terms
}

/// Gradient-jump stabilization `J_u`.
pub fn add_j_u<T: Real>(
    t: &mut TripletBuilder<T>,
    mesh: &Mesh<T>,
    geo: &InterfaceGeometry<T>,
    dofs: &DofMap,
    params: &PhysicalParams<T>,
) {
    for side in Side::BOTH {
        let mu = params.mu(side);
        let sets = geo.side(side);
        for &e in &sets.ghost_edges {
            let len = mesh.edge_length(e);
            let mut terms = Vec::with_capacity(6);
            for (k, sign) in neighbors(mesh, e) {
                let edges = edges_of(mesh, k);
                for (m, g) in cr_gradients(mesh, k).into_iter().enumerate() {
                    terms.push(LocalVec { side, edge: edges[m], v: g * sign });
                }
            }
            add_gram(t, dofs, &terms, mu * len * len);
        }
        for seg in &sets.cut_segments {
            let terms = segment_terms(mesh, seg, seg.a, |g, sign, _| Local {
                side,
                edge: 0,
                a: sign * g.dot(seg.normal),
                b: T::zero(),
            });
            add_nitsche(t, dofs, &terms, mu * seg.length * seg.length, T::one());
        }
    }
}

fn neighbors<T: Real>(mesh: &Mesh<T>, e: usize) -> [(usize, T); 2] {
    match mesh.edges()[e].triangles {
        [Some(l), Some(r)] => [(l, T::one()), (r, -T::one())],
        _ => unreachable!("stabilized edges are interior"),
    }
}

/// `b_h(q, v)` with rows indexed by pressures and columns by velocities.
pub fn add_b_h<T: Real>(
    t: &mut TripletBuilder<T>,
    mesh: &Mesh<T>,
    geo: &InterfaceGeometry<T>,
    dofs: &DofMap,
    params: &PhysicalParams<T>,
) {
    let p_dof = |side: Side, k: usize| dofs.pressure(side, k).expect("element meets the phase");
    for k in 0..mesh.num_triangles() {
        let edges = edges_of(mesh, k);
        let grads = cr_gradients(mesh, k);
        for side in Side::BOTH {
            let area = geo.piece_area(mesh, k, side);
            if area <= T::zero() {
                continue;
            }
            let row = p_dof(side, k);
            for m in 0..3 {
                for c in 0..2 {
                    t.add(row, velocity_dof(dofs, side, edges[m], c), -area * grads[m].component(c));
                }
            }
        }
    }

    for side in Side::BOTH {
        for seg in &geo.side(side).cut_segments {
            let half = T::lit(0.5);
            for (x, w) in chord_rule(seg.a, seg.b).iter() {
                for (k, sign) in [(seg.left, T::one()), (seg.right, -T::one())] {
                    let edges = edges_of(mesh, k);
                    let phi = cr_values(mesh, k, x);
                    for m in 0..3 {
                        for c in 0..2 {
                            let col = velocity_dof(dofs, side, edges[m], c);
                            let v = w * half * sign * phi[m] * seg.normal.component(c);
                            t.add(p_dof(side, seg.left), col, v);
                            t.add(p_dof(side, seg.right), col, v);
                        }
                    }
                }
            }
        }
    }

    for cut in geo.cut_elements() {
        let k = cut.element;
        let edges = edges_of(mesh, k);
        for (x, w) in chord_rule(cut.points[0], cut.points[1]).iter() {
            let phi = cr_values(mesh, k, x);
            for q_side in Side::BOTH {
                let row = p_dof(q_side, k);
                let wq = params.weight(q_side);
                for v_side in Side::BOTH {
                    for m in 0..3 {
                        for c in 0..2 {
                            let v = w * wq * v_side.jump_sign::<T>() * phi[m] * cut.normal.component(c);
                            t.add(row, velocity_dof(dofs, v_side, edges[m], c), v);
                        }
                    }
                }
            }
        }
    }
}

/// Pressure-jump stabilization `J_p`.
pub fn add_j_p<T: Real>(
    t: &mut TripletBuilder<T>,
    mesh: &Mesh<T>,
    geo: &InterfaceGeometry<T>,
    dofs: &DofMap,
    params: &PhysicalParams<T>,
) {
    let mut jump = |side: Side, l: usize, r: usize, scale: T| {
        let (i, j) = (dofs.pressure(side, l).unwrap(), dofs.pressure(side, r).unwrap());
        t.add(i, i, scale);
        t.add(i, j, -scale);
        t.add(j, i, -scale);
        t.add(j, j, scale);
    };
    for side in Side::BOTH {
        let inv_mu = params.mu(side).recip();
        let sets = geo.side(side);
        for &e in &sets.ghost_edges {
            let [(l, _), (r, _)] = neighbors::<T>(mesh, e);
            let len = mesh.edge_length(e);
            jump(side, l, r, inv_mu * len * len);
        }
        for seg in &sets.cut_segments {
            jump(side, seg.left, seg.right, inv_mu * seg.length * seg.length);
        }
    }
}

/// `L_h(v)`: body force over every piece plus the interface traction with
/// the conjugate weights.
pub fn assemble_load<T: Real>(
    mesh: &Mesh<T>,
    geo: &InterfaceGeometry<T>,
    dofs: &DofMap,
    params: &PhysicalParams<T>,
    load: &dyn LoadData<T>,
) -> Result<Vec<T>> {
    let mut rhs = vec![T::zero(); dofs.n_u()];
    for k in 0..mesh.num_triangles() {
        let edges = edges_of(mesh, k);
        for side in Side::BOTH {
            if geo.piece_area(mesh, k, side) <= T::zero() {
                continue;
            }
            let poly = geo.piece(mesh, k, side).expect("piece with positive area");
            let rule = polygon_rule(&poly, VOLUME_DEGREE)?;
            for (x, w) in rule.iter() {
                let f = load.body_force(side, x);
                let phi = cr_values(mesh, k, x);
                for m in 0..3 {
                    for c in 0..2 {
                        let i = velocity_dof(dofs, side, edges[m], c);
                        rhs[i] += w * f.component(c) * phi[m];
                    }
                }
            }
        }
    }
    for cut in geo.cut_elements() {
        let k = cut.element;
        let edges = edges_of(mesh, k);
        for (x, w) in chord_rule(cut.points[0], cut.points[1]).iter() {
            let s = load.interface_traction(x);
            if s == T::zero() {
                continue;
            }
            let phi = cr_values(mesh, k, x);
            for side in Side::BOTH {
                // Conjugate weight: w₂ on phase 1 and w₁ on phase 2.
                let wc = params.weight(side.other());
                for m in 0..3 {
                    for c in 0..2 {
                        let i = velocity_dof(dofs, side, edges[m], c);
                        rhs[i] += w * s * wc * phi[m] * cut.normal.component(c);
                    }
                }
            }
        }
    }
    Ok(rhs)
}

/// `c` with entries `μᵢ⁻¹ |K ∩ Ωᵢ|`, so that `cᵀp = (μ⁻¹p, 1)`.
pub fn pressure_constraint<T: Real>(
    mesh: &Mesh<T>,
    geo: &InterfaceGeometry<T>,
    dofs: &DofMap,
    params: &PhysicalParams<T>,
) -> Vec<T> {
    (0..dofs.n_p())
        .map(|i| {
            let (side, k) = dofs.pressure_owner(i);
            geo.piece_area(mesh, k, side) / params.mu(side)
        })
        .collect()
}

fn build<T: Real>(nrows: usize, ncols: usize, parts: &[&dyn Fn(&mut TripletBuilder<T>)]) -> CsrMatrix<T> {
    let mut t = TripletBuilder::new(nrows, ncols);
    for part in parts {
        part(&mut t);
    }
    t.build()
}

pub fn assemble_a_h<T: Real>(
    mesh: &Mesh<T>,
    geo: &InterfaceGeometry<T>,
    dofs: &DofMap,
    params: &PhysicalParams<T>,
) -> CsrMatrix<T> {
    build(dofs.n_u(), dofs.n_u(), &[&|t| add_a_h(t, mesh, geo, dofs, params)])
}

pub fn assemble_j_u<T: Real>(
    mesh: &Mesh<T>,
    geo: &InterfaceGeometry<T>,
    dofs: &DofMap,
    params: &PhysicalParams<T>,
) -> CsrMatrix<T> {
    build(dofs.n_u(), dofs.n_u(), &[&|t| add_j_u(t, mesh, geo, dofs, params)])
}

pub fn assemble_b_h<T: Real>(
    mesh: &Mesh<T>,
    geo: &InterfaceGeometry<T>,
    dofs: &DofMap,
    params: &PhysicalParams<T>,
) -> CsrMatrix<T> {
    build(dofs.n_p(), dofs.n_u(), &[&|t| add_b_h(t, mesh, geo, dofs, params)])
}

pub fn assemble_j_p<T: Real>(
    mesh: &Mesh<T>,
    geo: &InterfaceGeometry<T>,
    dofs: &DofMap,
    params: &PhysicalParams<T>,
) -> CsrMatrix<T> {
    build(dofs.n_p(), dofs.n_p(), &[&|t| add_j_p(t, mesh, geo, dofs, params)])
}

/// Blocks of the discrete problem over all velocity unknowns, before the
/// boundary unknowns are eliminated.
#[derive(Clone, Debug)]
pub struct Forms<T> {
    /// `a_h + J_u`.
    pub a: CsrMatrix<T>,
    pub b: CsrMatrix<T>,
    pub j_p: CsrMatrix<T>,
    pub load: Vec<T>,
    pub constraint: Vec<T>,
}

pub fn assemble_forms<T: Real>(
    mesh: &Mesh<T>,
    geo: &InterfaceGeometry<T>,
    dofs: &DofMap,
    params: &PhysicalParams<T>,
    load: &dyn LoadData<T>,
) -> Result<Forms<T>> {
    params.validate()?;
    let a = build(
        dofs.n_u(),
        dofs.n_u(),
        &[&|t| add_a_h(t, mesh, geo, dofs, params), &|t| add_j_u(t, mesh, geo, dofs, params)],
    );
    Ok(Forms {
        a,
        b: assemble_b_h(mesh, geo, dofs, params),
        j_p: assemble_j_p(mesh, geo, dofs, params),
        load: assemble_load(mesh, geo, dofs, params, load)?,
        constraint: pressure_constraint(mesh, geo, dofs, params),
    })
}

/// The bordered system
/// `[[A, Bᵀ, 0], [−B, J_p, c], [0, cᵀ, 0]]` on the free velocity unknowns.
#[derive(Clone, Debug)]
pub struct SaddleSystem<T> {
    pub a: CsrMatrix<T>,
    pub b: CsrMatrix<T>,
    pub j_p: CsrMatrix<T>,
    pub c: Vec<T>,
    pub rhs_u: Vec<T>,
    pub rhs_p: Vec<T>,
    /// Global velocity index of every free unknown.
    pub free: Vec<usize>,
    /// Boundary values on Dirichlet unknowns, zero elsewhere.
    pub dirichlet_values: Vec<T>,
}

impl<T: Real> SaddleSystem<T> {
    pub fn n_free(&self) -> usize {
        self.free.len()
    }

    pub fn n_p(&self) -> usize {
        self.c.len()
    }

    /// Order of the bordered matrix.
    pub fn size(&self) -> usize {
        self.n_free() + self.n_p() + 1
    }

    /// Largest absolute entry of the bordered matrix.
    pub fn max_entry(&self) -> T {
        let c = self.c.iter().fold(T::zero(), |m, v| m.max(v.abs()));
        self.a.max_abs().max(self.b.max_abs()).max(self.j_p.max_abs()).max(c)
    }

    /// Bordered matrix times `(u, p, λ)`.
    pub fn apply(&self, x: &[T]) -> Vec<T> {
        let (nf, np) = (self.n_free(), self.n_p());
        let (u, rest) = x.split_at(nf);
        let (p, lambda) = rest.split_at(np);
        let lambda = lambda[0];
        let mut out = self.a.mul_vec(u);
        for (o, v) in out.iter_mut().zip(self.b.tr_mul_vec(p)) {
            *o += v;
        }
        let bu = self.b.mul_vec(u);
        let jp = self.j_p.mul_vec(p);
        for i in 0..np {
            out.push(-bu[i] + jp[i] + self.c[i] * lambda);
        }
        out.push(self.c.iter().zip(p).fold(T::zero(), |acc, (&c, &q)| acc + c * q));
        out
    }

    pub fn rhs(&self) -> Vec<T> {
        let mut r = self.rhs_u.clone();
        r.extend_from_slice(&self.rhs_p);
        r.push(T::zero());
        r
    }
}

/// Eliminates the Dirichlet unknowns of assembled forms.
pub fn eliminate_dirichlet<T: Real>(forms: &Forms<T>, dofs: &DofMap, dirichlet_values: Vec<T>) -> SaddleSystem<T> {
    let n_u = dofs.n_u();
    let free: Vec<usize> = (0..n_u).filter(|&i| !dofs.is_dirichlet(i)).collect();
    let mut map = vec![None; n_u];
    for (i, &g) in free.iter().enumerate() {
        map[g] = Some(i);
    }
    let all_p: Vec<Option<usize>> = (0..dofs.n_p()).map(Some).collect();
    let a = forms.a.select(&map, &map, free.len(), free.len());
    let b = forms.b.select(&all_p, &map, dofs.n_p(), free.len());

    let a_g = forms.a.mul_vec(&dirichlet_values);
    let b_g = forms.b.mul_vec(&dirichlet_values);
    let rhs_u = free.iter().map(|&g| forms.load[g] - a_g[g]).collect();
    SaddleSystem {
        a,
        b,
        j_p: forms.j_p.clone(),
        c: forms.constraint.clone(),
        rhs_u,
        rhs_p: b_g,
        free,
        dirichlet_values,
    }
}

pub fn assemble_system<T: Real>(
    mesh: &Mesh<T>,
    geo: &InterfaceGeometry<T>,
    dofs: &DofMap,
    params: &PhysicalParams<T>,
    load: &dyn LoadData<T>,
) -> Result<SaddleSystem<T>> {
    let forms = assemble_forms(mesh, geo, dofs, params, load)?;
    let g = apply_dirichlet(mesh, dofs, |side, x| load.dirichlet(side, x));
    Ok(eliminate_dirichlet(&forms, dofs, g))
}

//! Classification of a mesh against a level-set interface.
//!
//! The interface is approximated by one straight chord per cut element,
//! joining the points where it crosses the element's edges. Each cut element
//! is split by its chord into a triangle and a quadrilateral (or two
//! triangles when the chord passes through a vertex).

use log::debug;

use crate::error::{Error, Result};
use crate::level_set::LevelSet;
use crate::mesh::Mesh;
use crate::quadrature::polygon_area;
use crate::vec2::Vec2;
use crate::Real;

/// The two phases: `One` is `{phi > 0}`, `Two` is `{phi < 0}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Side {
    One,
    Two,
}

impl Side {
    pub const BOTH: [Side; 2] = [Side::One, Side::Two];

    pub fn index(self) -> usize {
        match self {
            Side::One => 0,
            Side::Two => 1,
        }
    }

    pub fn other(self) -> Side {
        match self {
            Side::One => Side::Two,
            Side::Two => Side::One,
        }
    }

    /// `+1` on Ω₁ and `-1` on Ω₂: the sign of a side's trace in `[v] = v₁ - v₂`.
    pub fn jump_sign<T: Real>(self) -> T {
        match self {
            Side::One => T::one(),
            Side::Two => -T::one(),
        }
    }

    fn of_value<T: Real>(phi: T) -> Side {
        if phi > T::zero() {
            Side::One
        } else {
            Side::Two
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ElementKind {
    Uncut(Side),
    /// Index into [`InterfaceGeometry::cut_elements`].
    Cut(usize),
}

/// Interface data of one cut element.
#[derive(Clone, Debug, PartialEq)]
pub struct CutElementData<T> {
    pub element: usize,
    /// Chord end points, in counterclockwise traversal order of the element.
    pub points: [Vec2<T>; 2],
    /// Unit chord normal pointing from Ω₁ into Ω₂.
    pub normal: Vec2<T>,
    pub length: T,
    /// `K ∩ Ω₁` and `K ∩ Ω₂` as counterclockwise convex polygons.
    pub pieces: [Vec<Vec2<T>>; 2],
    pub areas: [T; 2],
}

impl<T: Real> CutElementData<T> {
    pub fn piece(&self, side: Side) -> &[Vec2<T>] {
        &self.pieces[side.index()]
    }

    pub fn area(&self, side: Side) -> T {
        self.areas[side.index()]
    }

    /// Which side of the chord `x` lies on.
    pub fn side_of(&self, x: Vec2<T>) -> Side {
        if (x - self.points[0]).dot(self.normal) > T::zero() {
            Side::Two
        } else {
            Side::One
        }
    }
}

/// The part `e ∩ Ω_i` of an edge shared by two cut elements.
#[derive(Clone, Debug, PartialEq)]
pub struct CutSegment<T> {
    pub edge: usize,
    pub side: Side,
    pub a: Vec2<T>,
    pub b: Vec2<T>,
    pub length: T,
    /// Lower-indexed neighbor `K_l`.
    pub left: usize,
    /// Higher-indexed neighbor `K_r`.
    pub right: usize,
    /// Unit normal pointing from `left` to `right`.
    pub normal: Vec2<T>,
}

/// Element and edge sets attached to one phase.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SideSets<T> {
    /// Elements meeting the phase (`T_{h,i}`), ascending.
    pub elements: Vec<usize>,
    /// Uncut elements of the phase, ascending.
    pub uncut_elements: Vec<usize>,
    /// All edges of `elements`, ascending.
    pub edges: Vec<usize>,
    /// Full edges lying in the closed phase that are not shared by two cut
    /// elements, domain-boundary edges included.
    pub uncut_edges: Vec<usize>,
    /// Segments `e ∩ Ω_i` of edges shared by two cut elements.
    pub cut_segments: Vec<CutSegment<T>>,
    /// Interior edges between two elements of the phase, at least one cut.
    pub ghost_edges: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct InterfaceGeometry<T> {
    kinds: Vec<ElementKind>,
    cut_elements: Vec<CutElementData<T>>,
    vertex_values: Vec<T>,
    edge_crossings: Vec<Option<Vec2<T>>>,
    sides: [SideSets<T>; 2],
    theta_max: T,
    h: T,
}

impl<T: Real> InterfaceGeometry<T> {
    pub fn kind(&self, k: usize) -> ElementKind {
        self.kinds[k]
    }

    pub fn kinds(&self) -> &[ElementKind] {
        &self.kinds
    }

    pub fn is_cut(&self, k: usize) -> bool {
        matches!(self.kinds[k], ElementKind::Cut(_))
    }

    /// Whether element `k` belongs to `T_{h,i}`.
    pub fn meets(&self, k: usize, side: Side) -> bool {
        match self.kinds[k] {
            ElementKind::Uncut(s) => s == side,
            ElementKind::Cut(_) => true,
        }
    }

    pub fn cut_elements(&self) -> &[CutElementData<T>] {
        &self.cut_elements
    }

    pub fn cut_data(&self, k: usize) -> Option<&CutElementData<T>> {
        match self.kinds[k] {
            ElementKind::Cut(c) => Some(&self.cut_elements[c]),
            ElementKind::Uncut(_) => None,
        }
    }

    pub fn num_cut(&self) -> usize {
        self.cut_elements.len()
    }

    pub fn side(&self, side: Side) -> &SideSets<T> {
        &self.sides[side.index()]
    }

    /// Level-set values at the vertices after snapping.
    pub fn vertex_values(&self) -> &[T] {
        &self.vertex_values
    }

    /// Point where the interface crosses edge `e`, if it does.
    pub fn edge_crossing(&self, e: usize) -> Option<Vec2<T>> {
        self.edge_crossings[e]
    }

    /// Largest `|ẽ|² / max(|K_l^i|, |K_r^i|)` over all cut segments.
    pub fn theta_max(&self) -> T {
        self.theta_max
    }

    /// Mesh size the geometry was classified with.
    pub fn h(&self) -> T {
        self.h
    }

    /// Measure of `K ∩ Ω_i` (the chord-approximated piece).
    pub fn piece_area(&self, mesh: &Mesh<T>, k: usize, side: Side) -> T {
        match self.kinds[k] {
            ElementKind::Uncut(s) if s == side => mesh.area(k),
            ElementKind::Uncut(_) => T::zero(),
            ElementKind::Cut(c) => self.cut_elements[c].area(side),
        }
    }

    /// The polygon `K ∩ Ω_i`, or `None` when `K` does not meet the phase.
    pub fn piece(&self, mesh: &Mesh<T>, k: usize, side: Side) -> Option<Vec<Vec2<T>>> {
        match self.kinds[k] {
            ElementKind::Uncut(s) if s == side => Some(mesh.triangle_vertices(k).to_vec()),
            ElementKind::Uncut(_) => None,
            ElementKind::Cut(c) => Some(self.cut_elements[c].piece(side).to_vec()),
        }
    }

    /// Phase containing point `x` of element `k`.
    pub fn side_of_point(&self, k: usize, x: Vec2<T>) -> Side {
        match self.kinds[k] {
            ElementKind::Uncut(s) => s,
            ElementKind::Cut(c) => self.cut_elements[c].side_of(x),
        }
    }

    pub fn total_area(&self, mesh: &Mesh<T>, side: Side) -> T {
        (0..mesh.num_triangles()).fold(T::zero(), |acc, k| acc + self.piece_area(mesh, k, side))
    }

    /// Total length of the discrete interface.
    pub fn interface_length(&self) -> T {
        self.cut_elements.iter().fold(T::zero(), |acc, c| acc + c.length)
    }
}

#[derive(Clone, Copy, Debug)]
pub struct ClassifyOptions {
    /// Reject cut elements without an uncut same-phase element sharing a
    /// vertex.
    pub require_uncut_neighbors: bool,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        Self { require_uncut_neighbors: true }
    }
}

/// Relative threshold below which vertex values are pushed into Ω₁.
const SNAP: f64 = 1e-12;
/// Segments shorter than this (relative to h) are dropped.
const MIN_SEGMENT: f64 = 1e-14;
/// Pieces smaller than this fraction of the element make it uncut.
const MIN_PIECE: f64 = 1e-12;
/// Parameter margin separating crossings at end points from interior ones.
const ENDPOINT_MARGIN: f64 = 1e-10;
const BISECTION_TOL: f64 = 1e-13;
const SAMPLES_PER_EDGE: usize = 8;

fn snap<T: Real>(phi: T, h: T) -> T {
    let tol = T::lit(SNAP) * h;
    if phi.abs() < tol {
        tol
    } else {
        phi
    }
}

/// Root of `phi` on `a + t (b - a)` given the (snapped) end values.
/// `Ok(None)` when the edge is not crossed.
fn edge_crossing<T: Real>(
    ls: &dyn LevelSet<T>,
    a: Vec2<T>,
    b: Vec2<T>,
    fa: T,
    fb: T,
    label: &dyn Fn() -> String,
) -> Result<Option<T>> {
    let changes = (fa > T::zero()) != (fb > T::zero());
    let (lo_m, hi_m) = (T::lit(ENDPOINT_MARGIN), T::one() - T::lit(ENDPOINT_MARGIN));

    if let Some(roots) = ls.segment_crossings(a, b) {
        let interior: Vec<T> = roots.iter().copied().filter(|&t| t > lo_m && t < hi_m).collect();
        if interior.len() > usize::from(changes) {
            return Err(Error::AssumptionViolation(format!(
                "{} is crossed {} times by the interface",
                label(),
                interior.len(),
            )));
        }
        if !changes {
            return Ok(None);
        }
        if let Some(&t) = interior.first() {
            return Ok(Some(t));
        }
        // Crossing at an end point (snapped vertex): take the closest root.
        let best = roots.iter().copied().filter(|t| t.is_finite()).min_by(|x, y| {
            let dx = (*x - T::lit(0.5)).abs();
            let dy = (*y - T::lit(0.5)).abs();
            dx.partial_cmp(&dy).unwrap()
        });
        if let Some(t) = best {
            if t > -T::lit(1e-6) && t < T::one() + T::lit(1e-6) {
                return Ok(Some(t.max(T::zero()).min(T::one())));
            }
        }
        // Fall through to bisection.
    }

    // Sampled sign pattern along the edge.
    let mut ts = vec![T::zero()];
    let mut vals = vec![fa];
    for s in 1..=SAMPLES_PER_EDGE {
        let t = T::from_count(s) / T::from_count(SAMPLES_PER_EDGE + 1);
        ts.push(t);
        vals.push(ls.value(a.lerp(b, t)));
    }
    ts.push(T::one());
    vals.push(fb);
    let brackets: Vec<usize> =
        (0..vals.len() - 1).filter(|&i| (vals[i] > T::zero()) != (vals[i + 1] > T::zero())).collect();
    if brackets.len() > usize::from(changes) || (!changes && !brackets.is_empty()) {
        return Err(Error::AssumptionViolation(format!("{} is crossed more than once by the interface", label())));
    }
    if !changes {
        return Ok(None);
    }
    let Some(&i) = brackets.first() else {
        return Err(Error::GeometryDegenerate(format!("no root bracketed on {}", label())));
    };
    let (mut lo, mut hi, mut flo) = (ts[i], ts[i + 1], vals[i]);
    for _ in 0..200 {
        if hi - lo <= T::lit(BISECTION_TOL) {
            break;
        }
        let mid = (lo + hi) * T::lit(0.5);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = ls.value(a.lerp(b, mid));
        if (fm > T::zero()) == (flo > T::zero()) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Ok(Some((lo + hi) * T::lit(0.5)))
}

enum CutOutcome<T> {
    Cut(CutElementData<T>),
    /// One piece is empty up to rounding; the element lies in this phase.
    Within(Side),
}

fn dedup_polygon<T: Real>(poly: &mut Vec<Vec2<T>>, tol: T) {
    let mut out: Vec<Vec2<T>> = Vec::with_capacity(poly.len());
    for &p in poly.iter() {
        if out.last().is_none_or(|q| (p - *q).norm() > tol) {
            out.push(p);
        }
    }
    while out.len() > 1 && (out[0] - *out.last().unwrap()).norm() <= tol {
        out.pop();
    }
    *poly = out;
}

/// Splits a counterclockwise triangle with snapped vertex values by the
/// chord through the crossings on its sign-changing edges. `crossing(i)`
/// gives the crossing on the edge from vertex `i` to vertex `i + 1`.
fn split_triangle<T: Real>(
    element: usize,
    tri: [Vec2<T>; 3],
    values: [T; 3],
    crossing: impl Fn(usize) -> Result<Vec2<T>>,
) -> Result<CutOutcome<T>> {
    let sides = values.map(Side::of_value);
    let mut pieces: [Vec<Vec2<T>>; 2] = [Vec::new(), Vec::new()];
    let mut points = Vec::with_capacity(2);
    for i in 0..3 {
        let j = (i + 1) % 3;
        pieces[sides[i].index()].push(tri[i]);
        if sides[i] != sides[j] {
            let x = crossing(i)?;
            pieces[0].push(x);
            pieces[1].push(x);
            points.push(x);
        }
    }
    if points.len() != 2 {
        return Err(Error::GeometryDegenerate(format!("element {element} is not cut (vertex values {values:?})")));
    }
    let area = ((tri[1] - tri[0]).cross(tri[2] - tri[0]) * T::lit(0.5)).abs();
    let diam = (tri[1] - tri[0]).norm().max((tri[2] - tri[1]).norm()).max((tri[0] - tri[2]).norm());
    for p in pieces.iter_mut() {
        dedup_polygon(p, T::lit(1e-13) * diam);
    }
    let areas = [0, 1].map(|s| if pieces[s].len() < 3 { T::zero() } else { polygon_area(&pieces[s]).abs() });
    let chord = points[1] - points[0];
    let length = chord.norm();
    let tiny = T::lit(MIN_PIECE) * area;
    if areas[0] <= tiny || areas[1] <= tiny || length <= T::lit(MIN_SEGMENT) * diam {
        let keep = if areas[0] >= areas[1] { Side::One } else { Side::Two };
        return Ok(CutOutcome::Within(keep));
    }
    let mut normal = chord.perp() * length.recip();
    let inner = (0..3).find(|&i| sides[i] == Side::Two).expect("mixed signs");
    if (tri[inner] - points[0]).dot(normal) < T::zero() {
        normal = -normal;
    }
    Ok(CutOutcome::Cut(CutElementData { element, points: [points[0], points[1]], normal, length, pieces, areas }))
}

/// Point where the interface crosses the segment `[a, b]`, using the same
/// vertex snapping (relative to `h`) as [`classify`].
pub fn segment_crossing<T: Real>(ls: &dyn LevelSet<T>, a: Vec2<T>, b: Vec2<T>, h: T) -> Result<Option<Vec2<T>>> {
    let (fa, fb) = (snap(ls.value(a), h), snap(ls.value(b), h));
    let label = || format!("segment {a:?} - {b:?}");
    Ok(edge_crossing(ls, a, b, fa, fb, &label)?.map(|t| a.lerp(b, t)))
}

/// Splits an arbitrary counterclockwise triangle by the interface.
/// `h` scales the vertex snapping tolerance.
pub fn cut_triangle<T: Real>(ls: &dyn LevelSet<T>, tri: [Vec2<T>; 3], h: T) -> Result<CutElementData<T>> {
    let values = tri.map(|p| snap(ls.value(p), h));
    let outcome = split_triangle(0, tri, values, |i| {
        let j = (i + 1) % 3;
        let label = || format!("triangle edge {i}");
        edge_crossing(ls, tri[i], tri[j], values[i], values[j], &label)?
            .map(|t| tri[i].lerp(tri[j], t))
            .ok_or_else(|| Error::GeometryDegenerate(format!("no crossing on triangle edge {i}")))
    })?;
    match outcome {
        CutOutcome::Cut(data) => Ok(data),
        CutOutcome::Within(side) => {
            Err(Error::GeometryDegenerate(format!("interface only touches the triangle; it lies in phase {side:?}")))
        }
    }
}

/// Cut data of element `k`, which must have vertices on both sides.
pub fn cut_element<T: Real>(mesh: &Mesh<T>, ls: &dyn LevelSet<T>, k: usize) -> Result<CutElementData<T>> {
    let mut data = cut_triangle(ls, mesh.triangle_vertices(k), mesh.h())?;
    data.element = k;
    Ok(data)
}

/// Classifies `mesh` against `ls`, enforcing all interface assumptions.
pub fn classify<T: Real>(mesh: &Mesh<T>, ls: &dyn LevelSet<T>) -> Result<InterfaceGeometry<T>> {
    classify_with(mesh, ls, ClassifyOptions::default())
}

pub fn classify_with<T: Real>(
    mesh: &Mesh<T>,
    ls: &dyn LevelSet<T>,
    options: ClassifyOptions,
) -> Result<InterfaceGeometry<T>> {
    let h = mesh.h();
    let vertex_values: Vec<T> = mesh.vertices().iter().map(|&p| snap(ls.value(p), h)).collect();

    let mut edge_crossings = Vec::with_capacity(mesh.num_edges());
    for (e, edge) in mesh.edges().iter().enumerate() {
        let [va, vb] = edge.vertices;
        let [a, b] = mesh.edge_vertices(e);
        let label = || format!("edge {e} ({a:?} - {b:?})");
        let t = edge_crossing(ls, a, b, vertex_values[va], vertex_values[vb], &label)?;
        edge_crossings.push(t.map(|t| a.lerp(b, t)));
    }

    let mut kinds = Vec::with_capacity(mesh.num_triangles());
    let mut cut_elements = Vec::new();
    for (k, tri) in mesh.triangles().iter().enumerate() {
        let values = tri.map(|v| vertex_values[v]);
        let sides = values.map(Side::of_value);
        if sides[0] == sides[1] && sides[1] == sides[2] {
            kinds.push(ElementKind::Uncut(sides[0]));
            continue;
        }
        let refs = mesh.triangle_edges(k);
        let outcome = split_triangle(k, mesh.triangle_vertices(k), values, |i| {
            // Edge from local vertex i to i+1 is local edge i+2.
            let e = refs[(i + 2) % 3].edge;
            edge_crossings[e]
                .ok_or_else(|| Error::GeometryDegenerate(format!("edge {e} of element {k} has no crossing")))
        })?;
        match outcome {
            CutOutcome::Cut(data) => {
                kinds.push(ElementKind::Cut(cut_elements.len()));
                cut_elements.push(data);
            }
            CutOutcome::Within(side) => kinds.push(ElementKind::Uncut(side)),
        }
    }

    let mut geometry = InterfaceGeometry {
        kinds,
        cut_elements,
        vertex_values,
        edge_crossings,
        sides: [SideSets::default(), SideSets::default()],
        theta_max: T::zero(),
        h,
    };
    for side in Side::BOTH {
        geometry.sides[side.index()] = build_side_sets(mesh, &geometry, side);
    }
    geometry.theta_max = compute_theta(mesh, &geometry);
    debug!(
        "classified {} elements: {} cut, theta_max = {}",
        mesh.num_triangles(),
        geometry.num_cut(),
        geometry.theta_max
    );

    if options.require_uncut_neighbors {
        check_uncut_neighbors(mesh, &geometry)?;
    }
    Ok(geometry)
}

fn build_side_sets<T: Real>(mesh: &Mesh<T>, geo: &InterfaceGeometry<T>, side: Side) -> SideSets<T> {
    let h = mesh.h();
    let elements: Vec<usize> = (0..mesh.num_triangles()).filter(|&k| geo.meets(k, side)).collect();
    let uncut_elements = elements.iter().copied().filter(|&k| !geo.is_cut(k)).collect();

    let mut edges: Vec<usize> = elements.iter().flat_map(|&k| mesh.triangle_edges(k).iter().map(|r| r.edge)).collect();
    edges.sort_unstable();
    edges.dedup();

    let mut uncut_edges = Vec::new();
    let mut cut_segments = Vec::new();
    let mut ghost_edges = Vec::new();
    for &e in &edges {
        let edge = &mesh.edges()[e];
        let [va, vb] = edge.vertices;
        let (sa, sb) = (Side::of_value(geo.vertex_values[va]), Side::of_value(geo.vertex_values[vb]));
        let [a, b] = mesh.edge_vertices(e);
        match edge.triangles {
            [Some(l), Some(r)] => {
                let (in_l, in_r) = (geo.meets(l, side), geo.meets(r, side));
                let (cut_l, cut_r) = (geo.is_cut(l), geo.is_cut(r));
                if in_l && in_r && (cut_l || cut_r) {
                    ghost_edges.push(e);
                }
                if cut_l && cut_r {
                    let segment = match geo.edge_crossings[e] {
                        Some(x) if sa == side => Some((a, x)),
                        Some(x) if sb == side => Some((x, b)),
                        Some(_) => None,
                        None if sa == side && sb == side => Some((a, b)),
                        None => None,
                    };
                    if let Some((p, q)) = segment {
                        let length = (q - p).norm();
                        if length > T::lit(MIN_SEGMENT) * h {
                            let mut normal = (b - a).perp().normalized();
                            if (mesh.centroid(r) - mesh.centroid(l)).dot(normal) < T::zero() {
                                normal = -normal;
                            }
                            cut_segments.push(CutSegment {
                                edge: e,
                                side,
                                a: p,
                                b: q,
                                length,
                                left: l,
                                right: r,
                                normal,
                            });
                        }
                    }
                } else if in_l && in_r && sa == side && sb == side && geo.edge_crossings[e].is_none() {
                    uncut_edges.push(e);
                }
            }
            [Some(_), None] => {
                if sa == side && sb == side && geo.edge_crossings[e].is_none() {
                    uncut_edges.push(e);
                }
            }
            _ => unreachable!("edges have at least one triangle"),
        }
    }
    SideSets { elements, uncut_elements, edges, uncut_edges, cut_segments, ghost_edges }
}

fn compute_theta<T: Real>(mesh: &Mesh<T>, geo: &InterfaceGeometry<T>) -> T {
    let mut theta = T::zero();
    for side in Side::BOTH {
        for seg in &geo.side(side).cut_segments {
            let big = geo.piece_area(mesh, seg.left, side).max(geo.piece_area(mesh, seg.right, side));
            theta = theta.max(seg.length * seg.length / big);
        }
    }
    theta
}

fn check_uncut_neighbors<T: Real>(mesh: &Mesh<T>, geo: &InterfaceGeometry<T>) -> Result<()> {
    let vertex_triangles = mesh.vertex_triangles();
    for cut in geo.cut_elements() {
        let k = cut.element;
        for side in Side::BOTH {
            let found = mesh.triangles()[k]
                .iter()
                .any(|&v| vertex_triangles[v].iter().any(|&t| geo.kind(t) == ElementKind::Uncut(side)));
            if !found {
                return Err(Error::AssumptionViolation(format!(
                    "cut element {k} has no uncut neighbor in phase {side:?} sharing a vertex"
                )));
            }
        }
    }
    Ok(())
}

//! Structured conforming triangulations of axis-aligned rectangles.
//!
//! Every grid square is split by its bottom-left to top-right diagonal, so
//! meshes with `n` and `2n` subdivisions are nested.

use crate::error::{Error, Result};
use crate::vec2::Vec2;
use crate::Real;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rectangle<T> {
    pub min: Vec2<T>,
    pub max: Vec2<T>,
}

impl<T: Real> Rectangle<T> {
    pub fn new(min: Vec2<T>, max: Vec2<T>) -> Self {
        Self { min, max }
    }

    /// `[-1, 1]^2`.
    pub fn symmetric_unit() -> Self {
        Self::new(Vec2::new(-T::one(), -T::one()), Vec2::new(T::one(), T::one()))
    }

    pub fn width(&self) -> T {
        self.max.x - self.min.x
    }

    pub fn height(&self) -> T {
        self.max.y - self.min.y
    }

    pub fn area(&self) -> T {
        self.width() * self.height()
    }

    pub fn contains(&self, p: Vec2<T>) -> bool {
        p.x >= self.min.x && p.x <= self.max.x && p.y >= self.min.y && p.y <= self.max.y
    }
}

/// A mesh edge: its sorted vertex pair and the one or two triangles sharing it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Edge {
    pub vertices: [usize; 2],
    /// Adjacent triangles in increasing index order; `None` in the second
    /// slot marks a boundary edge.
    pub triangles: [Option<usize>; 2],
}

impl Edge {
    pub fn is_boundary(&self) -> bool {
        self.triangles[1].is_none()
    }

    pub fn neighbors(&self) -> impl Iterator<Item = usize> + '_ {
        self.triangles.iter().flatten().copied()
    }
}

/// Reference from a triangle to one of its edges.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EdgeRef {
    pub edge: usize,
    /// True when the triangle's counterclockwise traversal runs from
    /// `vertices[0]` to `vertices[1]` of the edge.
    pub forward: bool,
}

#[derive(Clone, Debug)]
pub struct Mesh<T> {
    domain: Rectangle<T>,
    divisions: [usize; 2],
    vertices: Vec<Vec2<T>>,
    triangles: Vec<[usize; 3]>,
    edges: Vec<Edge>,
    /// Local edge `m` is opposite local vertex `m`.
    triangle_edges: Vec<[EdgeRef; 3]>,
    boundary_edges: Vec<bool>,
    h: T,
}

impl<T: Real> Mesh<T> {
    pub fn domain(&self) -> &Rectangle<T> {
        &self.domain
    }

    /// Number of squares along x and y.
    pub fn divisions(&self) -> [usize; 2] {
        self.divisions
    }

    pub fn vertices(&self) -> &[Vec2<T>] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn triangle_edges(&self, k: usize) -> &[EdgeRef; 3] {
        &self.triangle_edges[k]
    }

    pub fn is_boundary_edge(&self, e: usize) -> bool {
        self.boundary_edges[e]
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    /// Largest triangle diameter.
    pub fn h(&self) -> T {
        self.h
    }

    /// Grid spacing along the shorter side; on `[-1,1]^2` with `n`
    /// subdivisions this is `2/n`, the value used to label result tables.
    pub fn spacing(&self) -> T {
        let sx = self.domain.width() / T::from_count(self.divisions[0]);
        let sy = self.domain.height() / T::from_count(self.divisions[1]);
        sx.min(sy)
    }

    pub fn triangle_vertices(&self, k: usize) -> [Vec2<T>; 3] {
        let [a, b, c] = self.triangles[k];
        [self.vertices[a], self.vertices[b], self.vertices[c]]
    }

    pub fn edge_vertices(&self, e: usize) -> [Vec2<T>; 2] {
        let [a, b] = self.edges[e].vertices;
        [self.vertices[a], self.vertices[b]]
    }

    pub fn edge_length(&self, e: usize) -> T {
        let [a, b] = self.edge_vertices(e);
        (b - a).norm()
    }

    pub fn edge_midpoint(&self, e: usize) -> Vec2<T> {
        let [a, b] = self.edge_vertices(e);
        a.lerp(b, T::lit(0.5))
    }

    /// Signed area (positive for counterclockwise triangles).
    pub fn signed_area(&self, k: usize) -> T {
        let [a, b, c] = self.triangle_vertices(k);
        (b - a).cross(c - a) * T::lit(0.5)
    }

    pub fn area(&self, k: usize) -> T {
        self.signed_area(k).abs()
    }

    pub fn centroid(&self, k: usize) -> Vec2<T> {
        let [a, b, c] = self.triangle_vertices(k);
        (a + b + c) * T::lit(1.0 / 3.0)
    }

    pub fn diameter(&self, k: usize) -> T {
        let [a, b, c] = self.triangle_vertices(k);
        (b - a).norm().max((c - b).norm()).max((a - c).norm())
    }

    /// Gradients of the barycentric coordinates of triangle `k`.
    pub fn barycentric_gradients(&self, k: usize) -> [Vec2<T>; 3] {
        let p = self.triangle_vertices(k);
        let two_area = self.signed_area(k) * T::lit(2.0);
        std::array::from_fn(|m| {
            let a = p[(m + 1) % 3];
            let b = p[(m + 2) % 3];
            Vec2::new(a.y - b.y, b.x - a.x) * two_area.recip()
        })
    }

    pub fn barycentric(&self, k: usize, x: Vec2<T>) -> [T; 3] {
        let p = self.triangle_vertices(k);
        let two_area = self.signed_area(k) * T::lit(2.0);
        std::array::from_fn(|m| {
            let a = p[(m + 1) % 3];
            let b = p[(m + 2) % 3];
            (b - a).cross(x - a) / two_area
        })
    }

    /// The local index `m` of `edge` in triangle `k`.
    pub fn local_edge_index(&self, k: usize, edge: usize) -> Option<usize> {
        self.triangle_edges[k].iter().position(|r| r.edge == edge)
    }

    /// Triangles incident to each vertex.
    pub fn vertex_triangles(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.vertices.len()];
        for (k, tri) in self.triangles.iter().enumerate() {
            for &v in tri {
                out[v].push(k);
            }
        }
        out
    }
}

/// Builds the structured triangulation of `domain` with `n` subdivisions
/// along its shorter side.
pub fn build_structured_mesh<T: Real>(domain: Rectangle<T>, n: usize) -> Result<Mesh<T>> {
    if n == 0 {
        return Err(Error::InvalidInput("mesh needs at least one subdivision".into()));
    }
    let (w, hgt) = (domain.width(), domain.height());
    if !(w > T::zero() && hgt > T::zero()) || !w.is_finite() || !hgt.is_finite() {
        return Err(Error::InvalidInput(format!("degenerate rectangle {:?}..{:?}", domain.min, domain.max)));
    }
    let step = w.min(hgt) / T::from_count(n);
    let count = |len: T| -> usize {
        let c = (len / step).round().to_f64_lossy();
        (c as usize).max(1)
    };
    let (nx, ny) = (count(w), count(hgt));

    let mut vertices = Vec::with_capacity((nx + 1) * (ny + 1));
    for j in 0..=ny {
        let y = if j == ny { domain.max.y } else { domain.min.y + hgt * T::from_count(j) / T::from_count(ny) };
        for i in 0..=nx {
            let x = if i == nx { domain.max.x } else { domain.min.x + w * T::from_count(i) / T::from_count(nx) };
            vertices.push(Vec2::new(x, y));
        }
    }

    let vid = |i: usize, j: usize| j * (nx + 1) + i;
    let mut triangles = Vec::with_capacity(2 * nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let (v00, v10, v11, v01) = (vid(i, j), vid(i + 1, j), vid(i + 1, j + 1), vid(i, j + 1));
            triangles.push([v00, v10, v11]);
            triangles.push([v00, v11, v01]);
        }
    }

    // Edges sorted lexicographically by their sorted vertex pair.
    let mut keyed: Vec<([usize; 2], usize, usize)> = Vec::with_capacity(3 * triangles.len());
    for (k, tri) in triangles.iter().enumerate() {
        for m in 0..3 {
            let (a, b) = (tri[(m + 1) % 3], tri[(m + 2) % 3]);
            keyed.push(([a.min(b), a.max(b)], k, m));
        }
    }
    keyed.sort_unstable();

    let mut edges: Vec<Edge> = Vec::new();
    let placeholder = EdgeRef { edge: usize::MAX, forward: true };
    let mut triangle_edges = vec![[placeholder; 3]; triangles.len()];
    for (key, k, m) in keyed {
        let tri = triangles[k];
        let forward = tri[(m + 1) % 3] == key[0];
        match edges.last_mut() {
            Some(last) if last.vertices == key => {
                if last.triangles[1].is_some() {
                    return Err(Error::GeometryDegenerate(format!("edge {key:?} shared by more than two triangles")));
                }
                last.triangles[1] = Some(k);
            }
            _ => edges.push(Edge { vertices: key, triangles: [Some(k), None] }),
        }
        triangle_edges[k][m] = EdgeRef { edge: edges.len() - 1, forward };
    }
    let boundary_edges = edges.iter().map(Edge::is_boundary).collect();

    let mut mesh =
        Mesh { domain, divisions: [nx, ny], vertices, triangles, edges, triangle_edges, boundary_edges, h: T::zero() };
    mesh.h = (0..mesh.num_triangles()).map(|k| mesh.diameter(k)).fold(T::zero(), |a, b| a.max(b));
    Ok(mesh)
}

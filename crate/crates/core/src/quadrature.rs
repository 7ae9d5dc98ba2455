//! Quadrature on triangles, convex polygons and straight segments.
//!
//! All rules carry physical points and positive weights summing to the
//! measure of the cell they integrate over.

use crate::error::{Error, Result};
use crate::vec2::Vec2;
use crate::Real;

/// Volume rule degree used when assembling.
pub const VOLUME_DEGREE: usize = 4;
/// Segment rule degree used for interface, cut-edge and full-edge integrals.
pub const SEGMENT_DEGREE: usize = 3;
/// Volume rule degree used for error norms.
pub const ERROR_DEGREE: usize = 5;

#[derive(Clone, Debug, PartialEq)]
pub struct QuadratureRule<T> {
    pub points: Vec<Vec2<T>>,
    pub weights: Vec<T>,
}

impl<T: Real> QuadratureRule<T> {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Sum of the weights.
    pub fn measure(&self) -> T {
        self.weights.iter().fold(T::zero(), |a, &w| a + w)
    }

    pub fn integrate(&self, mut f: impl FnMut(Vec2<T>) -> T) -> T {
        self.points.iter().zip(&self.weights).fold(T::zero(), |acc, (&p, &w)| acc + w * f(p))
    }

    pub fn iter(&self) -> impl Iterator<Item = (Vec2<T>, T)> + '_ {
        self.points.iter().copied().zip(self.weights.iter().copied())
    }

    fn append(&mut self, other: QuadratureRule<T>) {
        self.points.extend(other.points);
        self.weights.extend(other.weights);
    }
}

/// Builds a rule from barycentric orbits `(multiplicity class, a, weight)`,
/// weights normalized to a unit-area triangle.
fn from_orbits<T: Real>(orbits: &[(u8, f64, f64)]) -> QuadratureRule<T> {
    let mut points = Vec::new();
    let mut weights = Vec::new();
    let half = T::lit(0.5);
    for &(kind, a, w) in orbits {
        let (a_t, w_t) = (T::lit(a), T::lit(w) * half);
        match kind {
            // centroid
            1 => {
                let c = T::lit(1.0 / 3.0);
                points.push(Vec2::new(c, c));
                weights.push(w_t);
            }
            // (a, a, 1 - 2a) and permutations
            3 => {
                let b = T::one() - a_t - a_t;
                for p in [Vec2::new(a_t, a_t), Vec2::new(b, a_t), Vec2::new(a_t, b)] {
                    points.push(p);
                    weights.push(w_t);
                }
            }
            _ => unreachable!("orbit class"),
        }
    }
    QuadratureRule { points, weights }
}

/// Symmetric rule on the reference triangle `(0,0),(1,0),(0,1)` exact for
/// polynomials of total degree `degree`.
pub fn triangle_rule<T: Real>(degree: usize) -> Result<QuadratureRule<T>> {
    let rule = match degree {
        1 => from_orbits(&[(1, 0.0, 1.0)]),
        2 => from_orbits(&[(3, 1.0 / 6.0, 1.0 / 3.0)]),
        // No positive 4-point degree-3 rule exists; the 6-point degree-4
        // rule is used instead.
        3 | 4 => from_orbits(&[
            (3, 0.445_948_490_915_964_9, 0.223_381_589_678_011_47),
            (3, 0.091_576_213_509_770_74, 0.109_951_743_655_321_87),
        ]),
        5 => {
            let s15 = 15f64.sqrt();
            from_orbits(&[
                (1, 0.0, 9.0 / 40.0),
                (3, (6.0 - s15) / 21.0, (155.0 - s15) / 1200.0),
                (3, (6.0 + s15) / 21.0, (155.0 + s15) / 1200.0),
            ])
        }
        d => return Err(Error::UnsupportedDegree(d)),
    };
    Ok(rule)
}

/// Maps a reference-triangle rule onto the physical triangle `tri`.
pub fn map_to_triangle<T: Real>(reference: &QuadratureRule<T>, tri: [Vec2<T>; 3]) -> QuadratureRule<T> {
    let (e1, e2) = (tri[1] - tri[0], tri[2] - tri[0]);
    let jac = e1.cross(e2).abs();
    QuadratureRule {
        points: reference.points.iter().map(|p| tri[0] + e1 * p.x + e2 * p.y).collect(),
        weights: reference.weights.iter().map(|&w| w * jac).collect(),
    }
}

/// Signed area of a polygon given counterclockwise (shoelace formula).
pub fn polygon_area<T: Real>(poly: &[Vec2<T>]) -> T {
    let n = poly.len();
    let twice = (0..n).fold(T::zero(), |acc, i| acc + poly[i].cross(poly[(i + 1) % n]));
    twice * T::lit(0.5)
}

/// Rule on a convex polygon with 3 or 4 vertices, built by fan
/// triangulation from vertex 0.
pub fn polygon_rule<T: Real>(poly: &[Vec2<T>], degree: usize) -> Result<QuadratureRule<T>> {
    if !(3..=4).contains(&poly.len()) {
        return Err(Error::InvalidInput(format!("polygon rule needs 3 or 4 vertices, got {}", poly.len())));
    }
    let diam = poly.iter().flat_map(|a| poly.iter().map(move |b| (*a - *b).norm())).fold(T::zero(), |a, b| a.max(b));
    let area = polygon_area(poly).abs();
    if !(area >= T::lit(1e-14) * diam * diam) || diam == T::zero() {
        return Err(Error::DegeneratePolygon { area: area.to_f64_lossy() });
    }
    let reference = triangle_rule(degree)?;
    let mut rule = QuadratureRule { points: Vec::new(), weights: Vec::new() };
    for i in 1..poly.len() - 1 {
        rule.append(map_to_triangle(&reference, [poly[0], poly[i], poly[i + 1]]));
    }
    Ok(rule)
}

/// Polygon rule whose fan triangles are each split uniformly into
/// `4^levels` congruent triangles.
pub fn subdivided_polygon_rule<T: Real>(poly: &[Vec2<T>], degree: usize, levels: u32) -> Result<QuadratureRule<T>> {
    let coarse = polygon_rule(poly, 1)?;
    debug_assert_eq!(coarse.len(), poly.len() - 2);
    let reference = triangle_rule(degree)?;
    let mut triangles: Vec<[Vec2<T>; 3]> = (1..poly.len() - 1).map(|i| [poly[0], poly[i], poly[i + 1]]).collect();
    let half = T::lit(0.5);
    for _ in 0..levels {
        triangles = triangles
            .into_iter()
            .flat_map(|[a, b, c]| {
                let (ab, bc, ca) = ((a + b) * half, (b + c) * half, (c + a) * half);
                [[a, ab, ca], [ab, b, bc], [ca, bc, c], [bc, ca, ab]]
            })
            .collect();
    }
    let mut rule = QuadratureRule { points: Vec::new(), weights: Vec::new() };
    for tri in triangles {
        rule.append(map_to_triangle(&reference, tri));
    }
    Ok(rule)
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre<T: Real>(n: usize) -> (Vec<T>, Vec<T>) {
    assert!(n >= 1, "Gauss-Legendre needs at least one point");
    let mut nodes = vec![T::zero(); n];
    let mut weights = vec![T::zero(); n];
    let nf = T::from_count(n);
    for i in 0..n {
        // Chebyshev-like initial guess, then Newton on P_n.
        let guess = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut x = T::lit(guess);
        let mut dp = T::one();
        for _ in 0..100 {
            let (mut p0, mut p1) = (T::one(), x);
            for k in 2..=n {
                let kf = T::from_count(k);
                let p2 = ((kf + kf - T::one()) * x * p1 - (kf - T::one()) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 1 { x } else { p1 };
            let pn1 = if n == 1 { T::one() } else { p0 };
            dp = nf * (x * pn - pn1) / (x * x - T::one());
            let dx = pn / dp;
            x -= dx;
            if dx.abs() <= T::epsilon() * T::lit(4.0) {
                break;
            }
        }
        if n == 1 {
            dp = T::one();
        }
        nodes[i] = x;
        weights[i] = T::lit(2.0) / ((T::one() - x * x) * dp * dp);
    }
    // Ascending order.
    nodes.reverse();
    weights.reverse();
    (nodes, weights)
}

/// Gauss rule on the segment `[a, b]` exact for polynomials of `degree`.
pub fn segment_rule<T: Real>(a: Vec2<T>, b: Vec2<T>, degree: usize) -> Result<QuadratureRule<T>> {
    let len = (b - a).norm();
    if !(len > T::zero()) || !len.is_finite() {
        return Err(Error::ZeroLengthSegment);
    }
    let n = degree / 2 + 1;
    let (nodes, weights) = gauss_legendre::<T>(n);
    let half = T::lit(0.5);
    Ok(QuadratureRule {
        points: nodes.iter().map(|&t| a.lerp(b, (t + T::one()) * half)).collect(),
        weights: weights.iter().map(|&w| w * half * len).collect(),
    })
}

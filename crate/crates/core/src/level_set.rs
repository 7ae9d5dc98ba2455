//! Level-set descriptions of the interface.
//!
//! Sign convention: the outer phase Ω₁ is `{phi > 0}`, the inner phase Ω₂ is
//! `{phi < 0}` and the interface is the zero set.

use crate::vec2::Vec2;
use crate::Real;

pub trait LevelSet<T: Real>: Sync {
    fn value(&self, x: Vec2<T>) -> T;

    /// Parameters `t` at which the segment `a + t (b - a)` crosses the
    /// interface transversally, when they are available in closed form.
    /// Returning `None` selects bisection.
    fn segment_crossings(&self, _a: Vec2<T>, _b: Vec2<T>) -> Option<Vec<T>> {
        None
    }

    /// Unit normal at an interface point, pointing from Ω₁ into Ω₂.
    fn normal(&self, _x: Vec2<T>) -> Option<Vec2<T>> {
        None
    }
}

/// Circle with Ω₂ inside; `phi` is the signed distance.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Circle<T> {
    pub center: Vec2<T>,
    pub radius: T,
}

impl<T: Real> Circle<T> {
    pub fn new(center: Vec2<T>, radius: T) -> Self {
        Self { center, radius }
    }

    pub fn perimeter(&self) -> T {
        T::TAU() * self.radius
    }

    pub fn area(&self) -> T {
        T::PI() * self.radius * self.radius
    }
}

impl<T: Real> LevelSet<T> for Circle<T> {
    fn value(&self, x: Vec2<T>) -> T {
        (x - self.center).norm() - self.radius
    }

    fn segment_crossings(&self, a: Vec2<T>, b: Vec2<T>) -> Option<Vec<T>> {
        // |a - c + t d|^2 = r^2
        let d = b - a;
        let f = a - self.center;
        let qa = d.norm_squared();
        if qa == T::zero() {
            return Some(Vec::new());
        }
        let qb = f.dot(d);
        let qc = f.norm_squared() - self.radius * self.radius;
        let disc = qb * qb - qa * qc;
        if disc <= T::zero() {
            // Misses or touches tangentially: no transversal crossing.
            return Some(Vec::new());
        }
        let s = disc.sqrt();
        // Cancellation-free pair of roots.
        let q = -(qb + qb.signum() * s);
        let (t1, t2) = if q == T::zero() { (-s / qa, s / qa) } else { (q / qa, qc / q) };
        Some(vec![t1.min(t2), t1.max(t2)])
    }

    fn normal(&self, x: Vec2<T>) -> Option<Vec2<T>> {
        let r = x - self.center;
        (r.norm() > T::zero()).then(|| -r.normalized())
    }
}

/// The half plane `{n·x < offset}` is Ω₂; `phi = n·x - offset`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HalfPlane<T> {
    pub normal: Vec2<T>,
    pub offset: T,
}

impl<T: Real> HalfPlane<T> {
    pub fn new(normal: Vec2<T>, offset: T) -> Self {
        Self { normal, offset }
    }
}

impl<T: Real> LevelSet<T> for HalfPlane<T> {
    fn value(&self, x: Vec2<T>) -> T {
        self.normal.dot(x) - self.offset
    }

    fn segment_crossings(&self, a: Vec2<T>, b: Vec2<T>) -> Option<Vec<T>> {
        let (fa, fb) = (self.value(a), self.value(b));
        if fa == fb {
            return Some(Vec::new());
        }
        Some(vec![fa / (fa - fb)])
    }

    fn normal(&self, _x: Vec2<T>) -> Option<Vec2<T>> {
        Some(-self.normal.normalized())
    }
}

/// Wraps an arbitrary scalar function; crossings are found by bisection.
pub struct FnLevelSet<F>(pub F);

impl<T: Real, F: Fn(Vec2<T>) -> T + Sync> LevelSet<T> for FnLevelSet<F> {
    fn value(&self, x: Vec2<T>) -> T {
        (self.0)(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn circle_crossings_match_values() {
        let c = Circle::new(Vec2::new(0.1f64, -0.05), 0.5);
        let (a, b) = (Vec2::new(-1.0, 0.0), Vec2::new(1.0, 0.2));
        let roots = c.segment_crossings(a, b).unwrap();
        assert_eq!(roots.len(), 2);
        for t in roots {
            assert!(c.value(a.lerp(b, t)).abs() < 1e-14);
        }
        assert!(c.segment_crossings(Vec2::new(-1.0, 0.55), Vec2::new(1.0, 0.55)).unwrap().is_empty());
    }

    #[test]
    fn circle_normal_points_inward() {
        let c = Circle::new(Vec2::new(0.0f64, 0.0), 0.5);
        let n = c.normal(Vec2::new(0.5, 0.0)).unwrap();
        assert!((n.x + 1.0).abs() < 1e-15 && n.y.abs() < 1e-15);
        assert!(c.value(Vec2::new(0.0, 0.0)) < 0.0);
        assert!(c.value(Vec2::new(0.9, 0.0)) > 0.0);
    }
}

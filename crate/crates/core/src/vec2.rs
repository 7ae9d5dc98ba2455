use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use crate::Real;

/// A point or vector in the plane.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Vec2<T> {
    pub x: T,
    pub y: T,
}

impl<T: Real> Vec2<T> {
    #[inline]
    pub fn new(x: T, y: T) -> Self {
        Self { x, y }
    }

    #[inline]
    pub fn zero() -> Self {
        Self::new(T::zero(), T::zero())
    }

    #[inline]
    pub fn dot(self, other: Self) -> T {
        self.x * other.x + self.y * other.y
    }

    /// z-component of the 3D cross product.
    #[inline]
    pub fn cross(self, other: Self) -> T {
        self.x * other.y - self.y * other.x
    }

    #[inline]
    pub fn norm(self) -> T {
        self.x.hypot(self.y)
    }

    #[inline]
    pub fn norm_squared(self) -> T {
        self.dot(self)
    }

    /// Rotation by +90 degrees.
    #[inline]
    pub fn perp(self) -> Self {
        Self::new(-self.y, self.x)
    }

    #[inline]
    pub fn normalized(self) -> Self {
        self * self.norm().recip()
    }

    #[inline]
    pub fn lerp(self, other: Self, t: T) -> Self {
        self + (other - self) * t
    }

    #[inline]
    pub fn component(self, c: usize) -> T {
        match c {
            0 => self.x,
            1 => self.y,
            _ => panic!("component index {c} out of range"),
        }
    }

    /// Unit vector along axis `c`.
    #[inline]
    pub fn unit(c: usize) -> Self {
        match c {
            0 => Self::new(T::one(), T::zero()),
            1 => Self::new(T::zero(), T::one()),
            _ => panic!("component index {c} out of range"),
        }
    }
}

impl<T: Real> Add for Vec2<T> {
    type Output = Self;
    #[inline]
    fn add(self, rhs: Self) -> Self {
        Self::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl<T: Real> AddAssign for Vec2<T> {
    #[inline]
    fn add_assign(&mut self, rhs: Self) {
        self.x = self.x + rhs.x;
        self.y = self.y + rhs.y;
    }
}

impl<T: Real> Sub for Vec2<T> {
    type Output = Self;
    #[inline]
    fn sub(self, rhs: Self) -> Self {
        Self::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl<T: Real> Neg for Vec2<T> {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        Self::new(-self.x, -self.y)
    }
}

impl<T: Real> Mul<T> for Vec2<T> {
    type Output = Self;
    #[inline]
    fn mul(self, s: T) -> Self {
        Self::new(self.x * s, self.y * s)
    }
}

/// 2x2 matrix stored row-major; for a velocity gradient row `c` holds
/// the gradient of component `c`.
pub type Mat2<T> = [[T; 2]; 2];

#[inline]
pub fn mat2_zero<T: Real>() -> Mat2<T> {
    [[T::zero(); 2]; 2]
}

/// Frobenius inner product.
#[inline]
pub fn mat2_ddot<T: Real>(a: &Mat2<T>, b: &Mat2<T>) -> T {
    a[0][0] * b[0][0] + a[0][1] * b[0][1] + a[1][0] * b[1][0] + a[1][1] * b[1][1]
}

/// `a n` for a gradient `a` and a direction `n`.
#[inline]
pub fn mat2_apply<T: Real>(a: &Mat2<T>, n: Vec2<T>) -> Vec2<T> {
    Vec2::new(a[0][0] * n.x + a[0][1] * n.y, a[1][0] * n.x + a[1][1] * n.y)
}

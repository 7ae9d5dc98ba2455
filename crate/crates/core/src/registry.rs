//! Built-in manufactured solutions on `[-1, 1]²` with a circular interface
//! of radius 0.5.

use std::fmt;
use std::str::FromStr;

use crate::assembly::PhysicalParams;
use crate::error::Error;
use crate::geometry::Side;
use crate::level_set::Circle;
use crate::norms::ExactSolution;
use crate::vec2::{Mat2, Vec2};
use crate::Real;

pub const INTERFACE_RADIUS: f64 = 0.5;
/// Viscosities of the sweep over the outer phase.
pub const MU1_SWEEP: [f64; 5] = [10.0, 1e2, 1e3, 1e4, 1e5];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ExampleKind {
    Example1,
    Example2,
    Patch,
}

impl ExampleKind {
    pub const ALL: [ExampleKind; 3] = [ExampleKind::Example1, ExampleKind::Example2, ExampleKind::Patch];

    pub fn name(self) -> &'static str {
        match self {
            ExampleKind::Example1 => "example1",
            ExampleKind::Example2 => "example2",
            ExampleKind::Patch => "patch",
        }
    }
}

impl fmt::Display for ExampleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExampleKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        ExampleKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::InvalidInput(format!("unknown example '{s}' (expected example1, example2 or patch)")))
    }
}

/// Single-phase smooth flow with `μ = 1`:
/// `u = (20xy³, 5x⁴ − 5y⁴)`, `p = 60x²y − 20y³`.
///
/// `Δu = (120xy, 60x² − 60y²) = ∇p`, so the body force vanishes.
#[derive(Clone, Copy, Debug, Default)]
pub struct PolynomialFlow;

impl<T: Real> ExactSolution<T> for PolynomialFlow {
    fn name(&self) -> &str {
        "example1"
    }

    fn velocity(&self, _: Side, x: Vec2<T>) -> Vec2<T> {
        let (a, b) = (x.x, x.y);
        Vec2::new(T::lit(20.0) * a * b.powi(3), T::lit(5.0) * (a.powi(4) - b.powi(4)))
    }

    fn velocity_gradient(&self, _: Side, x: Vec2<T>) -> Mat2<T> {
        let (a, b) = (x.x, x.y);
        [[T::lit(20.0) * b.powi(3), T::lit(60.0) * a * b * b], [T::lit(20.0) * a.powi(3), T::lit(-20.0) * b.powi(3)]]
    }

    fn pressure(&self, _: Side, x: Vec2<T>) -> T {
        T::lit(60.0) * x.x * x.x * x.y - T::lit(20.0) * x.y.powi(3)
    }

    fn body_force(&self, _: Side, _: Vec2<T>) -> Vec2<T> {
        Vec2::zero()
    }
}

/// Two-phase swirl vanishing on the interface:
/// `u = (y(r² − ¼), −x(r² − ¼)) / μᵢ`, `p = 4(y² − x²)`,
/// `f = (−8x − 8y, 8x + 8y)`, in coordinates relative to `center`.
#[derive(Clone, Copy, Debug)]
pub struct Swirl<T> {
    pub mu: [T; 2],
    pub center: Vec2<T>,
}

impl<T: Real> ExactSolution<T> for Swirl<T> {
    fn name(&self) -> &str {
        "example2"
    }

    fn velocity(&self, side: Side, x: Vec2<T>) -> Vec2<T> {
        let x = x - self.center;
        let s = x.norm_squared() - T::lit(0.25);
        Vec2::new(x.y * s, -x.x * s) * self.mu[side.index()].recip()
    }

    fn velocity_gradient(&self, side: Side, x: Vec2<T>) -> Mat2<T> {
        let x = x - self.center;
        let (a, b) = (x.x, x.y);
        let q = T::lit(0.25);
        let two_ab = T::lit(2.0) * a * b;
        let inv = self.mu[side.index()].recip();
        [
            [two_ab * inv, (a * a + T::lit(3.0) * b * b - q) * inv],
            [(q - T::lit(3.0) * a * a - b * b) * inv, -two_ab * inv],
        ]
    }

    fn pressure(&self, _: Side, x: Vec2<T>) -> T {
        let x = x - self.center;
        T::lit(4.0) * (x.y * x.y - x.x * x.x)
    }

    fn body_force(&self, _: Side, x: Vec2<T>) -> Vec2<T> {
        let x = x - self.center;
        let s = T::lit(8.0) * (x.x + x.y);
        Vec2::new(-s, s)
    }
}

/// Rigid rotation `u = (y, −x)`, `p = 0`, reproduced exactly by the
/// discretization.
#[derive(Clone, Copy, Debug, Default)]
pub struct RigidRotation;

impl<T: Real> ExactSolution<T> for RigidRotation {
    fn name(&self) -> &str {
        "patch"
    }

    fn velocity(&self, _: Side, x: Vec2<T>) -> Vec2<T> {
        Vec2::new(x.y, -x.x)
    }

    fn velocity_gradient(&self, _: Side, _: Vec2<T>) -> Mat2<T> {
        [[T::zero(), T::one()], [-T::one(), T::zero()]]
    }

    fn pressure(&self, _: Side, _: Vec2<T>) -> T {
        T::zero()
    }

    fn body_force(&self, _: Side, _: Vec2<T>) -> Vec2<T> {
        Vec2::zero()
    }
}

/// A problem ready to be discretized.
pub struct Example<T: Real> {
    pub kind: ExampleKind,
    pub exact: Box<dyn ExactSolution<T>>,
    pub params: PhysicalParams<T>,
    pub interface: Circle<T>,
}

fn centered_circle<T: Real>() -> Circle<T> {
    Circle::new(Vec2::zero(), T::lit(INTERFACE_RADIUS))
}

pub fn example1<T: Real>() -> Example<T> {
    Example {
        kind: ExampleKind::Example1,
        exact: Box::new(PolynomialFlow),
        params: PhysicalParams::new(T::one(), T::one()),
        interface: centered_circle(),
    }
}

/// Defaults are `μ₁ = 1000`, `μ₂ = 1`.
pub fn example2<T: Real>(mu1: T, mu2: T) -> Example<T> {
    Example {
        kind: ExampleKind::Example2,
        exact: Box::new(Swirl { mu: [mu1, mu2], center: Vec2::zero() }),
        params: PhysicalParams::new(mu1, mu2),
        interface: centered_circle(),
    }
}

impl<T: Real> Example<T> {
    /// Moves the interface to `center`. The two-phase solution moves with
    /// it; the single-phase ones hold for any interface.
    pub fn with_center(mut self, center: Vec2<T>) -> Self {
        self.interface = Circle::new(center, self.interface.radius);
        if self.kind == ExampleKind::Example2 {
            self.exact = Box::new(Swirl { mu: self.params.mu, center });
        }
        self
    }
}

pub fn patch<T: Real>() -> Example<T> {
    Example {
        kind: ExampleKind::Patch,
        exact: Box::new(RigidRotation),
        params: PhysicalParams::new(T::one(), T::one()),
        interface: centered_circle(),
    }
}

/// The named example with optional viscosity overrides.
///
/// Example 1 and the patch test have a single smooth solution, which only
/// satisfies the equations for equal viscosities; overriding one of them
/// changes both.
pub fn build<T: Real>(kind: ExampleKind, mu1: Option<T>, mu2: Option<T>) -> Example<T> {
    match kind {
        ExampleKind::Example2 => example2(mu1.unwrap_or(T::lit(1000.0)), mu2.unwrap_or(T::one())),
        ExampleKind::Example1 | ExampleKind::Patch => {
            let mut ex = if kind == ExampleKind::Example1 { example1() } else { patch() };
            if let Some(mu) = mu1.or(mu2) {
                ex.params.mu = [mu, mu];
            }
            ex
        }
    }
}

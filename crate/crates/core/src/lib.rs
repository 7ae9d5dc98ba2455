//! Unfitted nonconforming P1/P0 finite elements for two-phase Stokes
//! interface problems on structured triangulations.
//!
//! The numerical core is generic over [`Real`]; the aliases below fix the
//! scalar to `f64`.

// Negated comparisons are how NaN inputs get rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop, clippy::type_complexity)]

pub mod assembly;
pub mod error;
pub mod geometry;
pub mod level_set;
pub mod mesh;
pub mod norms;
pub mod quadrature;
pub mod registry;
pub mod scalar;
pub mod solver;
pub mod spaces;
pub mod sparse;
pub mod study;
pub mod vec2;

pub use error::{Error, Result};
pub use geometry::Side;
pub use scalar::Real;
pub use spaces::DofMap;

pub type Vec2 = vec2::Vec2<f64>;
pub type Mesh = mesh::Mesh<f64>;
pub type Circle = level_set::Circle<f64>;
pub type InterfaceGeometry = geometry::InterfaceGeometry<f64>;
pub type QuadratureRule = quadrature::QuadratureRule<f64>;
pub type DiscreteField = spaces::DiscreteField<f64>;
pub type PhysicalParams = assembly::PhysicalParams<f64>;
pub type SaddleSystem = assembly::SaddleSystem<f64>;
pub type CsrMatrix = sparse::CsrMatrix<f64>;
pub type Solution = solver::Solution<f64>;
pub type ErrorReport = norms::ErrorReport<f64>;
pub type Example = registry::Example<f64>;
pub type LevelOutcome = study::LevelOutcome<f64>;

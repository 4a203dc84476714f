//! Numerics for Lebesgue's cusp: the potential of a charged rod, its level surfaces, and
//! the Dirichlet problem on the region between two of them, solved by finite elements and
//! by walk-on-spheres.
//!
//! Everything is generic over the scalar through [`Real`]; `…64` and `…32` aliases fix it.

// `!(x > y)` is used on purpose so that NaN fails every check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod contour;
pub mod error;
pub mod fem;
pub mod figures;
pub mod mesh;
pub mod potential;
pub mod probe;
pub mod quadrature;
pub mod report;
pub mod scalar;
pub mod series;
pub mod sparse;
pub mod wiener;
pub mod wos;

pub use error::{Error, Result};
pub use scalar::Real;

pub type PotentialField64 = potential::PotentialField<f64>;
pub type PotentialField32 = potential::PotentialField<f32>;
pub type DensityProfile64 = potential::DensityProfile<f64>;
pub type DensityProfile32 = potential::DensityProfile<f32>;
pub type CrossSection64 = mesh::CrossSection<f64>;
pub type CrossSection32 = mesh::CrossSection<f32>;
pub type Mesh64 = mesh::Mesh<f64>;
pub type Mesh32 = mesh::Mesh<f32>;
pub type ContourCurve64 = contour::ContourCurve<f64>;
pub type ContourCurve32 = contour::ContourCurve<f32>;
pub type BoundaryData64 = fem::BoundaryData<f64>;
pub type BoundaryData32 = fem::BoundaryData<f32>;
pub type SolutionField64<'m> = fem::SolutionField<'m, f64>;
pub type SolutionField32<'m> = fem::SolutionField<'m, f32>;

//! Optimal quantization grids and their maximal radii.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod codebook;
pub mod distributions;
pub mod error;
pub mod optimizer;
pub mod quadrature;
pub mod radius;
pub mod roots;
pub mod scalar;
pub mod semiclosed;
pub mod special;
pub mod verify;

pub use codebook::{Codebook, CodebookMeta, Method};
pub use distributions::{DistributionSpec, Family, TailKind, TailReport};
pub use error::{QuantError, Result};
pub use scalar::Scalar;

pub type SpecF64 = DistributionSpec<f64>;
pub type SpecF32 = DistributionSpec<f32>;
pub type CodebookF64 = Codebook<f64>;
pub type CodebookF32 = Codebook<f32>;

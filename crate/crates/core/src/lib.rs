//! Convolution-kernel summability methods on the half-line.

pub mod cli;
pub mod corpus;
pub mod engine;
pub mod error;
pub mod kernel;
pub mod quadrature;
pub mod spectrum;

pub use error::{Error, Result};
pub use kernel::{CatalogEntry, Flavor, Kernel};

/// Default absolute quadrature tolerance.
pub const TOL_QUAD: f64 = 1e-8;
/// Masses below this are treated as zero by [`Kernel::normalize`].
pub const MASS_EPSILON: f64 = 1e-10;
/// A transform value below this counts as a zero.
pub const ZERO_EPSILON: f64 = 1e-9;

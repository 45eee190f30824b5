//! Diagnostics for entropy conservation in sampled solutions of
//! conservation laws: Besov-VMO moduli, mollification commutators,
//! companion-law residuals, boundary shell fluxes and global entropy
//! balances.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod besov;
pub mod boundary;
pub mod field;
pub mod geometry;
pub mod grid;
pub mod mollify;
pub mod reduce;
pub mod residuals;
pub mod snapshot;
pub mod sweep;
pub mod synth;
pub mod systems;

pub use error::{Error, Result};
pub use field::{lp_norm, Field};
pub use geometry::BoundaryGeometry;
pub use grid::{Grid, Region, Window};

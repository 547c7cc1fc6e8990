//! Numerical laboratory for uniformly quasiregular dynamics.

// NaN must fail range checks, hence `!(x <= tol)` throughout.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod automorphic;
pub mod dynamics;
pub mod error;
pub mod geometry;
pub mod infspace;
pub mod numeric;
pub mod schroder;

pub use error::{Error, Result};

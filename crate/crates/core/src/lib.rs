//! Numerical laboratory for interpolation of finite-dimensional Banach couples.

// `!(a <= b)` is used deliberately so that NaN fails the guard.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod ckmr;
pub mod cli;
pub mod convex;
pub mod error;
pub mod functors;
pub mod kfunctional;
pub mod lattice;
pub mod operators;
pub mod sampling;
pub mod spaces;
pub mod stability;
pub mod verdict;
pub mod verify;

pub use error::{LabError, Result};

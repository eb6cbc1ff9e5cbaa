//! Eigenvalues of `-div(A grad u) + c u = lambda b u` with homogeneous Dirichlet
//! data, approximated by the lowest-order Raviart-Thomas mixed method on
//! uniformly refined triangulations of a rectangle, with Richardson
//! extrapolation of the eigenvalue sequence and superclose measurements of the
//! scalar eigenfunction.

// `!(x > 0.0)` is used on purpose so NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod assembly;
pub mod coefficients;
pub mod config;
pub mod eigensolver;
pub mod error;
pub mod extrapolation;
pub mod mesh;
pub mod quadrature;
pub mod report;
pub mod sparse;
pub mod study;
pub mod superclose;

pub use error::{Error, Result};

//! Multipolar robust optimization for two-stage linear programs with
//! uncertain data.
//!
//! The recourse decision is not a function of the full scenario ξ but a
//! convex combination of recourses attached to a finite set of *poles* whose
//! hull covers the observed image `P·Ξ`. Choosing the poles recovers the
//! static, affinely adjustable and fully adjustable counterparts as special
//! cases; refining them tightens the bound.
//!
//! Layout:
//! - [`model`]: problems, uncertainty sets, shadow matrices, pole-sets.
//! - [`conic`]: LP/SOCP contract over the Clarabel interior-point solver.
//! - [`polegen`]: circumscribed simplices, cross-polytopes, tightening.
//! - [`mrc`]: compact and cutting-plane counterparts plus special cases.
//! - [`bounds`]: projected-pole lower bounds and the convergence driver.
//! - [`bench`]: lobbying and norm-example instances.
//! - [`cli`]: the `mpro` command line.

pub mod bench;
pub mod bounds;
pub mod cli;
pub mod conic;
pub mod error;
pub mod model;
pub mod mrc;
pub mod polegen;

pub use error::{Error, Result};

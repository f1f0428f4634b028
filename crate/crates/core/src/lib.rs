//! Solver and verification laboratory for the discrete planar L_p torsional
//! Minkowski problem.
//!
//! - [`geometry`]: measures on the circle, convex polygons, Wulff shapes,
//!   support functions, exact Hausdorff distance, Minkowski combinations.
//! - [`torsion`]: P1 finite elements for `Δu = −2`, `u = 0` on the boundary;
//!   torsional rigidity, per-facet torsion measures, L_p measures.
//! - [`solver`]: scale-invariant descent for the normalized and original
//!   L_p torsional Minkowski problems.
//! - [`verify`]: executable identity, inequality, continuity and uniqueness checks.
//! - [`cli`]: file formats and the `torsmink` command line.

// `!(x > 0.0)` is the house idiom for "reject NaN along with non-positive values".
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod geometry;
pub mod solver;
pub mod torsion;
pub mod verify;

pub use error::{Error, Result};

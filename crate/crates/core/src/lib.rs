//! First eigenpair of the anisotropic p-Laplacian with Robin boundary
//! conditions.
//!
//! The crate is split along the lines of the computation:
//!
//! * [`norms`] evaluates anisotropic norms `H`, their polars `H°` and
//!   gradients, and checks the structural identities between them.
//! * [`geometry`] builds planar polygonal domains and Wulff shapes and
//!   measures them (area, anisotropic perimeter, anisotropic distance,
//!   inradius, isoperimetric ratio).
//! * [`radial`] solves the radial eigenvalue ODE on Wulff shapes in any
//!   dimension by shooting.
//! * [`fem`] computes the first eigenpair on polygons with P1 elements.
//! * [`analysis`] compares domains against Wulff shapes: Faber-Krahn ratio,
//!   level-set representation functional, Hardy inequality and the inradius
//!   lower bound.
//! * [`checks`] bundles invariant suites that the command line can run.
//!
//! [`special`] holds a Bessel-function oracle that is independent of the
//! ODE integrator and used to cross-check it.

// `!(x > 0.0)` rejects NaN as well; the negated form is intentional.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod checks;
mod error;
pub mod fem;
pub mod geometry;
pub mod norms;
pub mod radial;
pub mod rootfind;
pub mod special;

pub use error::{Error, Result};
pub use fem::{EigenResult, Mesh};
pub use geometry::Domain;

pub use norms::AnisotropicNorm;
pub use radial::{RadialProblem, RadialSolution};

/// A point or vector in the plane.
pub type Point = [f64; 2];

//! Planar Monge–Ampère second boundary-value problem: a semi-discrete optimal
//! transport solver together with the boundary-regularity diagnostics built on
//! top of it (sections, obliqueness, Hessian estimates, Dirichlet comparison).
//!
//! Module overview:
//!
//! * [`geometry`]: convex domains with segment/arc boundaries, convex polygons,
//!   John ellipses and affine normalization.
//! * [`transport`]: max-affine Brenier potentials, Laguerre diagrams, the
//!   damped Newton solver and the Legendre dual.
//! * [`sections`]: sub-level sets of the potential and their statistics.
//! * [`regularity`]: Hessian fields, obliqueness, Hölder/Sobolev norms.
//! * [`comparison`]: Oliker–Prussner Dirichlet solver, comparison gaps and the
//!   dyadic cascade.
//! * [`harness`]: scenario configs, closed-form oracles, reports and the CLI
//!   driver.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod comparison;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod numerics;
pub mod regularity;
pub mod sections;
pub mod transport;

pub use error::{Error, Result};

/// Planar point / vector.
pub type Point = nalgebra::Vector2<f64>;
/// 2×2 matrix.
pub type Mat2 = nalgebra::Matrix2<f64>;

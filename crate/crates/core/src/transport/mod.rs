//! Semi-discrete optimal transport with quadratic cost.

pub mod density;
pub mod field;
pub mod laguerre;
pub mod maxaffine;
pub mod potential;
pub mod sampling;
pub mod solver;

pub use density::{DensityDescriptor, DensityField, Modulus};
pub use field::{MapFit, TransportField};
pub use laguerre::LaguerreDiagram;
pub use maxaffine::MaxAffine;
pub use potential::{DualPotential, SemiDiscretePotential};
pub use sampling::sample_target;
pub use solver::{solve_potential, SolveStats, SolverOptions};

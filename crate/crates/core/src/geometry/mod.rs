//! Planar convex geometry.

pub mod domain;
pub mod ellipse;
pub mod polygon;
pub mod quadrature;
pub mod svg;

pub use domain::{make_domain, BoundaryPiece, BoundaryPoint, ConvexDomain, DomainDescriptor};
pub use ellipse::{dual_map, john_normalize, Ellipse, NormalizingMap};
pub use polygon::{clip, ClipOperand, ConvexPolygon, HalfPlane, TaggedPolygon, BOUNDARY_TAG};

//! Exact polyhedral geometry over the integers and rationals.

pub mod dd;
pub mod fan;
pub mod hull;

pub use fan::{interior_point, normal_fan, Convention, PlacingOrder, PolyhedralFan};
pub use hull::{convex_hull, minkowski_sum, relative_interior_contains, AffineFrame, Facet, LatticePolytope};

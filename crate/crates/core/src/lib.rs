//! Bayesian integrals on positive toric varieties by tropical sector
//! decomposition.

pub mod error;
pub mod fixtures;
pub mod geometry;
pub mod linalg;
pub mod models;
pub mod poly;
pub mod sampler;
pub mod toric;
pub mod tropical;

pub use error::{Error, Result};
pub use linalg::Rat;
pub use models::{ModelSpec, PolytopeH};
pub use poly::{FactoredPolynomial, PositivePolynomial, RatPoly};
pub use toric::{cauchy_binet_check, ToricData};
pub use tropical::{convergence_check, h_bounds, Integrand, Sector, SectorTable};

//! Weighted-manifold curvature: Bakry-Émery tensor, sweeps, boundary
//! geometry and weight concavity criteria.

pub mod bakry_emery;
pub mod boundary;
pub mod checks;
pub mod manifold;

pub use bakry_emery::{
    bakry_emery, bakry_emery_at, bakry_emery_from, ricci_bound_sweep, sweep_min, BakryEmery,
    Branch, SweepMin, WEIGHT_FLOOR,
};
pub use boundary::{boundary_geometry, boundary_geometry_at, BoundaryGeometry};
pub use checks::{albi_check, weight_concavity_check, AlbiReport, LNorm, WeightConcavityReport};
pub use manifold::{Face, FaceRole, Side, WeightedManifold};

//! Numerical verification of curvature-dimension conditions for glued
//! weighted Riemannian manifolds.

pub mod error;
pub mod curvature;
pub mod geom_core;
pub mod gluing;
pub mod needle;
pub mod warp;
pub mod numerics;

pub use error::{Error, Result};

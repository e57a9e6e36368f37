//! Gluing two weighted collars along a common boundary and smoothing the
//! result into a family of metrics.

pub mod deform;
pub mod geodesic;
pub mod mollify;
pub mod profile;
pub mod space;
pub mod sweep;

pub use deform::{c1_matching_check, deform, C1Report, DeformedMetric};
pub use geodesic::{geodesic_integrate, GeodesicPath, GeodesicSample};
pub use mollify::{kernel, mollify, SmoothedMetric, SmoothedWeight};
pub use profile::{CalFProfile, SmoothingProfile};
pub use space::{assemble, compatibility_report, CollarGluedSpace, CompatibilityReport, CompatibilityRow, GluedMetric, GluedWeight};
pub use sweep::{smoothing_sweep, SweepConfig, SweepRow};

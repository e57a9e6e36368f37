//! One-dimensional curvature-dimension tools and needle decompositions of
//! glued spaces.

pub mod concavity;
pub mod density;
pub mod disintegrate;
pub mod distortion;
pub mod tilted;
pub mod wasserstein;

pub use concavity::{glue_1d, kn_check_fn, kn_concavity_check, Density1d, Glue1dReport, KnReport, MmInterval};
pub use density::{needle_jump_check, NeedleDensity, NeedleJumpReport, Provenance};
pub use disintegrate::{disintegrate_signed_distance, fermi_density, logderiv_vs_meancurv, LogDerivReport};
pub use distortion::{pi_kappa, sigma, sin_kappa, tau};
pub use tilted::{tilted_needle_check, TiltedReport};
pub use wasserstein::{w2, wasserstein_1d_cd_check, wasserstein_block_scan, BlockScanReport, Measure1d, WassersteinReport};

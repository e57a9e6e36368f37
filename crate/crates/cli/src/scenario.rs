//! Scenario files: manifolds, 1D intervals and an ordered task list.
//!
//! Files ending in `.json` are read as JSON, everything else as TOML.
//! Unknown keys are rejected at every level.

use std::path::Path;

use cdglue::curvature::{FaceRole, LNorm, Side};
use cdglue::gluing::CalFProfile;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub description: String,
    /// Offset for the low-discrepancy samplers.
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub manifolds: Vec<ManifoldDef>,
    /// Names of the two collars glued along their glue faces.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub glued: Option<[String; 2]>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub intervals: Vec<IntervalDef>,
    pub tasks: Vec<Task>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifoldDef {
    pub name: String,
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    /// Diagonal metric coefficients.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diagonal: Option<Vec<String>>,
    /// Upper triangle of the metric, row by row.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metric: Option<Vec<String>>,
    pub weight: String,
    pub n: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub faces: Vec<FaceDef>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FaceDef {
    /// One-based coordinate index, as in `x1, x2, …`.
    pub coord: usize,
    pub side: Side,
    pub role: FaceRole,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntervalDef {
    pub name: String,
    pub a: f64,
    pub b: f64,
    /// Smooth density in `x1`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub density: Option<String>,
    /// Two smooth pieces meeting at `at`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub piecewise: Option<PiecewiseDef>,
    pub k: f64,
    pub n: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PiecewiseDef {
    pub at: f64,
    pub left: String,
    pub right: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasureDef {
    pub lo: f64,
    pub hi: f64,
    /// Density against the interval's reference measure.
    #[serde(default = "one")]
    pub density: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Task {
    Compatibility(Compatibility),
    C1Matching(C1Matching),
    SmoothSweep(SmoothSweep),
    Needle(Needle),
    Logderiv(Logderiv),
    TiltedNeedle(TiltedNeedle),
    RicciBound(RicciBound),
    Warp(Warp),
    WeightConcavity(WeightConcavity),
    Albi(Albi),
    KnConcavity(KnConcavity),
    #[serde(rename = "glue_1d")]
    Glue1d(Glue1d),
    Wasserstein(Wasserstein),
    WassersteinScan(WassersteinScan),
}

impl Task {
    pub fn kind(&self) -> &'static str {
        match self {
            Task::Compatibility(_) => "compatibility",
            Task::C1Matching(_) => "c1_matching",
            Task::SmoothSweep(_) => "smooth_sweep",
            Task::Needle(_) => "needle",
            Task::Logderiv(_) => "logderiv",
            Task::TiltedNeedle(_) => "tilted_needle",
            Task::RicciBound(_) => "ricci_bound",
            Task::Warp(_) => "warp",
            Task::WeightConcavity(_) => "weight_concavity",
            Task::Albi(_) => "albi",
            Task::KnConcavity(_) => "kn_concavity",
            Task::Glue1d(_) => "glue_1d",
            Task::Wasserstein(_) => "wasserstein",
            Task::WassersteinScan(_) => "wasserstein_scan",
        }
    }
}

fn one() -> String {
    "1".into()
}
fn five() -> usize {
    5
}
fn samples() -> usize {
    4096
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Compatibility {
    #[serde(default = "five")]
    pub y_res: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct C1Matching {
    pub delta: f64,
    #[serde(default = "five")]
    pub y_res: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SmoothSweep {
    pub deltas: Vec<f64>,
    /// Target lower bound K; ε = K − min λ.
    pub k: f64,
    /// Defaults to the N of the first side.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<f64>,
    #[serde(default = "sweep_y_res")]
    pub y_res: usize,
    #[serde(default = "sweep_t_res")]
    pub t_res: usize,
    #[serde(default = "unit")]
    pub c: f64,
    #[serde(default = "unit")]
    pub f_scale: f64,
    /// Mollifier width `δ^h_exponent`.
    #[serde(default = "h_exponent")]
    pub h_exponent: f64,
    #[serde(default)]
    pub cal: CalFProfile,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_final_epsilon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_final_distance: Option<f64>,
}

fn sweep_y_res() -> usize {
    4
}
fn sweep_t_res() -> usize {
    40
}
fn unit() -> f64 {
    1.0
}
fn h_exponent() -> f64 {
    5.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Needle {
    /// Interface points.
    pub y: Vec<Vec<f64>>,
    pub t_min: f64,
    pub t_max: f64,
    pub k: f64,
    pub n: f64,
    #[serde(default = "samples")]
    pub samples: usize,
    /// Expected density, `left` for t < 0 and `right` for t ≥ 0, in `x1 = t`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference: Option<NeedleReference>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NeedleReference {
    pub left: String,
    pub right: String,
    /// Compared on |t| ≤ window.
    pub window: f64,
    pub tol: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Logderiv {
    pub y: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TiltedNeedle {
    pub y: Vec<Vec<f64>>,
    /// Tangential direction.
    pub v: Vec<f64>,
    pub b: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RicciBound {
    pub manifold: String,
    pub k: f64,
    #[serde(default = "grid_res")]
    pub resolution: usize,
}

fn grid_res() -> usize {
    12
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Warp {
    pub manifold: String,
    #[serde(default = "unit")]
    pub r: f64,
    #[serde(default = "collapse_res")]
    pub resolution: usize,
    /// Random points for the comparison against the product chart
    /// (one-dimensional fibers only); 0 skips it.
    #[serde(default)]
    pub product_points: usize,
    /// Expected Einstein constant of the warped product.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub einstein: Option<f64>,
}

fn collapse_res() -> usize {
    7
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightConcavity {
    pub manifold: String,
    pub kappa_bar: f64,
    pub eta: f64,
    #[serde(default = "grid_res")]
    pub resolution: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Albi {
    pub manifold: String,
    pub k: f64,
    pub l: f64,
    #[serde(default)]
    pub norm: LNorm,
    #[serde(default = "grid_res")]
    pub resolution: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KnConcavity {
    pub interval: String,
    #[serde(default = "samples")]
    pub samples: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Glue1d {
    /// Must have a piecewise density.
    pub interval: String,
    #[serde(default = "samples")]
    pub samples: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Wasserstein {
    pub interval: String,
    pub mu0: MeasureDef,
    pub mu1: MeasureDef,
    pub times: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WassersteinScan {
    pub interval: String,
    #[serde(default = "blocks")]
    pub blocks: usize,
}

fn blocks() -> usize {
    8
}

impl Scenario {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Schema(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Schema(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        if path.extension().is_some_and(|e| e == "json") {
            Self::from_json(&text)
        } else {
            Self::from_toml(&text)
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenarios always serialize")
    }
}

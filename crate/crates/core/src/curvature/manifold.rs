use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom_core::chart::{MetricChart, ScalarField};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Min,
    Max,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FaceRole {
    Glue,
    Free,
    ZeroSet,
}

/// A boundary face `x^coord = lo` (Min) or `x^coord = hi` (Max).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Face {
    /// Zero-based coordinate index.
    pub coord: usize,
    pub side: Side,
    pub role: FaceRole,
}

/// Sampling density used when validating weights at construction.
const VALIDATION_RES: usize = 9;

#[derive(Clone, Debug)]
pub struct WeightedManifold {
    pub chart: MetricChart,
    pub weight: ScalarField,
    /// Synthetic dimension N.
    pub n_synth: f64,
    pub faces: Vec<Face>,
}

impl WeightedManifold {
    pub fn new(chart: MetricChart, weight: ScalarField, n_synth: f64, faces: Vec<Face>) -> Result<Self> {
        let n = chart.dim();
        if weight.arity() != n {
            return Err(Error::Invalid(format!(
                "weight of arity {} on a {n}-dimensional chart",
                weight.arity()
            )));
        }
        if !n_synth.is_finite() || n_synth < n as f64 {
            return Err(Error::Invalid(format!(
                "synthetic dimension N = {n_synth} must be at least the chart dimension {n}"
            )));
        }
        for f in &faces {
            if f.coord >= n {
                return Err(Error::Invalid(format!("face coordinate {} out of range", f.coord + 1)));
            }
        }
        let glue: Vec<&Face> = faces.iter().filter(|f| f.role == FaceRole::Glue).collect();
        if glue.len() > 1 {
            return Err(Error::Invalid("at most one glue face is allowed".into()));
        }
        if let Some(g) = glue.first() {
            if g.coord != n - 1 || g.side != Side::Min || chart.domain().lo[n - 1] != 0.0 {
                return Err(Error::Invalid(
                    "the glue face must be x^n = 0 with the chart a collar x^n in [0, depth]".into(),
                ));
            }
        }
        let wm = WeightedManifold {
            chart,
            weight,
            n_synth,
            faces,
        };
        wm.validate_weight()?;
        Ok(wm)
    }

    pub fn dim(&self) -> usize {
        self.chart.dim()
    }

    /// N = n up to rounding.
    pub fn is_critical(&self) -> bool {
        (self.n_synth - self.dim() as f64).abs() < 1e-12
    }

    pub fn glue_face(&self) -> Option<Face> {
        self.faces.iter().copied().find(|f| f.role == FaceRole::Glue)
    }

    pub fn collar_depth(&self) -> f64 {
        let n = self.dim();
        self.chart.domain().hi[n - 1]
    }

    /// Face grid: `res` points per tangential axis (endpoints included),
    /// the face coordinate pinned.
    pub fn face_grid(&self, face: Face, res: usize) -> Vec<Vec<f64>> {
        let d = self.chart.domain();
        let axes: Vec<Vec<f64>> = (0..self.dim())
            .map(|k| {
                if k == face.coord {
                    vec![match face.side {
                        Side::Min => d.lo[k],
                        Side::Max => d.hi[k],
                    }]
                } else if res == 1 {
                    vec![0.5 * (d.lo[k] + d.hi[k])]
                } else {
                    (0..res)
                        .map(|i| d.lo[k] + (d.hi[k] - d.lo[k]) * i as f64 / (res - 1) as f64)
                        .collect()
                }
            })
            .collect();
        crate::geom_core::chart::tensor_grid(&axes)
    }

    fn validate_weight(&self) -> Result<()> {
        let d = self.chart.domain();
        let axes: Vec<Vec<f64>> = (0..self.dim())
            .map(|k| {
                (0..VALIDATION_RES)
                    .map(|i| d.lo[k] + (d.hi[k] - d.lo[k]) * i as f64 / (VALIDATION_RES - 1) as f64)
                    .collect()
            })
            .collect();
        for p in crate::geom_core::chart::tensor_grid(&axes) {
            let v = self.weight.value(&p)?;
            if v < 0.0 || !v.is_finite() {
                return Err(Error::Invalid(format!("weight {v} is negative at {p:?}")));
            }
        }
        if let Some(g) = self.glue_face() {
            for p in self.face_grid(g, VALIDATION_RES) {
                let v = self.weight.value(&p)?;
                if v <= 0.0 {
                    return Err(Error::Invalid(format!(
                        "weight must be positive on the glue face, got {v} at {p:?}"
                    )));
                }
            }
        }
        Ok(())
    }
}

use serde::Serialize;

use crate::curvature::manifold::{Face, Side, WeightedManifold};
use crate::error::{Error, Result};
use crate::geom_core::chart::{MetricField, ScalarSource};
use crate::geom_core::linalg::{self, M4};
use crate::geom_core::tensor::{Connection, TensorKind, TensorValue};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundaryGeometry {
    pub point: Vec<f64>,
    pub face: Face,
    /// Inward unit normal (contravariant components).
    pub normal: Vec<f64>,
    /// Induced metric in the face coordinate basis.
    pub face_metric: TensorValue,
    /// Second fundamental form `Π(X,Y) = g(ν, ∇_X Y)` in the face coordinate basis.
    pub sff: TensorValue,
    pub trace: f64,
    /// `trΠ − g(ν, ∇log Φ)`.
    pub h_phi: f64,
}

impl BoundaryGeometry {
    pub fn sff_matrix(&self) -> M4 {
        self.sff.matrix()
    }

    pub fn face_metric_matrix(&self) -> M4 {
        self.face_metric.matrix()
    }
}

/// Face tangent coordinate indices.
pub fn tangent_indices(n: usize, face: Face) -> Vec<usize> {
    (0..n).filter(|&k| k != face.coord).collect()
}

pub fn boundary_geometry_from(c: &Connection, dphi_over_phi: &[f64], face: Face, x: &[f64]) -> Result<BoundaryGeometry> {
    let n = c.n;
    let k = face.coord;
    let gkk = c.ginv[k][k];
    if gkk <= 0.0 {
        return Err(Error::DegenerateMetric {
            point: x.to_vec(),
            reason: "g^kk not positive on the face".into(),
        });
    }
    let sign = match face.side {
        Side::Min => 1.0,
        Side::Max => -1.0,
    };
    let norm = gkk.sqrt();
    let normal: Vec<f64> = (0..n).map(|j| sign * c.ginv[j][k] / norm).collect();
    let tan = tangent_indices(n, face);
    let m = tan.len();
    let mut gy = linalg::ZERO;
    let mut pi = linalg::ZERO;
    for (a, &ia) in tan.iter().enumerate() {
        for (b, &ib) in tan.iter().enumerate() {
            gy[a][b] = c.g[ia][ib];
            pi[a][b] = sign * c.gamma[k][ia][ib] / norm;
        }
    }
    let trace = if m == 0 {
        0.0
    } else {
        let gyi = linalg::inverse(&gy, m).ok_or_else(|| Error::DegenerateMetric {
            point: x.to_vec(),
            reason: "degenerate induced metric on face".into(),
        })?;
        let mut s = 0.0;
        for a in 0..m {
            for b in 0..m {
                s += gyi[a][b] * pi[a][b];
            }
        }
        s
    };
    let nu_log_phi: f64 = normal.iter().zip(dphi_over_phi).map(|(v, d)| v * d).sum();
    Ok(BoundaryGeometry {
        point: x.to_vec(),
        face,
        normal,
        face_metric: TensorValue::from_matrix(TensorKind::Bilinear, &gy, m, x),
        sff: TensorValue::from_matrix(TensorKind::Bilinear, &pi, m, x),
        trace,
        h_phi: trace - nu_log_phi,
    })
}

pub fn boundary_geometry_at(
    metric: &dyn MetricField,
    weight: &dyn ScalarSource,
    face: Face,
    x: &[f64],
) -> Result<BoundaryGeometry> {
    let mj = metric.metric_jet(x)?;
    let c = Connection::from_jet(&mj, x)?;
    let phi = weight.scalar_jet(x)?;
    if phi.v <= 0.0 {
        return Err(Error::EvalDomain(format!("weight {} not positive on the face", phi.v)));
    }
    let dl: Vec<f64> = (0..c.n).map(|j| phi.g[j] / phi.v).collect();
    boundary_geometry_from(&c, &dl, face, x)
}

/// Boundary geometry at `point` on a declared face of `wm`.
pub fn boundary_geometry(wm: &WeightedManifold, face: Face, point: &[f64]) -> Result<BoundaryGeometry> {
    if !wm.faces.contains(&face) {
        return Err(Error::Invalid(format!("{face:?} is not a declared face")));
    }
    let d = wm.chart.domain();
    let pinned = match face.side {
        Side::Min => d.lo[face.coord],
        Side::Max => d.hi[face.coord],
    };
    if (point[face.coord] - pinned).abs() > 1e-12 * (1.0 + pinned.abs()) {
        return Err(Error::Invalid(format!("{point:?} is not on the face {face:?}")));
    }
    boundary_geometry_at(&wm.chart, &wm.weight, face, point)
}

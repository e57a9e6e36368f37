use std::sync::Arc;

use serde::Serialize;

use crate::curvature::boundary::boundary_geometry_at;
use crate::curvature::manifold::WeightedManifold;
use crate::error::{Error, Result};
use crate::geom_core::linalg::{self, M4};
use crate::geom_core::tensor::Connection;
use crate::gluing::space::CollarGluedSpace;
use crate::needle::density::{NeedleDensity, Provenance};

pub const FOCAL_DET: f64 = 1e-10;
pub const LOGDERIV_TOL: f64 = 1e-5;

/// Node spacing of the tabulated Jacobi solution.
const NODE_SPACING: f64 = 0.01;
/// RK4 substeps per node interval and per evaluation.
const SUBSTEPS: usize = 2;

/// Jacobi data along the normal geodesic `s ↦ (y, s)` of one collar:
/// a parallel orthonormal frame `E` of `Y`'s tangent space and the matrix
/// Jacobi field `J'' = −R J` with `J(0) = I`, `J'(0) = −S`.
struct JacobiTable {
    side: WeightedManifold,
    y: Vec<f64>,
    ds: f64,
    /// Flattened `(E, J, J')` at `s = k·ds`.
    nodes: Vec<Vec<f64>>,
}

impl JacobiTable {
    fn n(&self) -> usize {
        self.side.dim()
    }

    fn point(&self, s: f64) -> Vec<f64> {
        let mut x = self.y.clone();
        x.push(s);
        x
    }

    fn rhs(&self, s: f64, st: &[f64]) -> Result<Vec<f64>> {
        let n = self.n();
        let m = n - 1;
        let x = self.point(s);
        let mj = self.side.chart.metric_jet_unchecked(&x)?;
        let c = Connection::from_jet(&mj, &x)?;
        let r = c.riemann();
        let (e, rest) = st.split_at(n * m);
        let (j, jp) = rest.split_at(m * m);
        let mut out = vec![0.0; st.len()];
        // E'^k_a = −Γ^k_{n i} E^i_a
        for a in 0..m {
            for k in 0..n {
                let mut v = 0.0;
                for i in 0..n {
                    v -= c.gamma[k][n - 1][i] * e[i * m + a];
                }
                out[k * m + a] = v;
            }
        }
        // R̂_ba = R(E_a, γ', γ', E_b)
        let mut rh = [[0.0; 4]; 4];
        for a in 0..m {
            for b in 0..m {
                let mut v = 0.0;
                for i in 0..n {
                    for l in 0..n {
                        v += r[i][n - 1][n - 1][l] * e[i * m + a] * e[l * m + b];
                    }
                }
                rh[b][a] = v;
            }
        }
        for a in 0..m {
            for b in 0..m {
                out[n * m + a * m + b] = jp[a * m + b];
                let mut v = 0.0;
                for c2 in 0..m {
                    v -= rh[a][c2] * j[c2 * m + b];
                }
                out[n * m + m * m + a * m + b] = v;
            }
        }
        Ok(out)
    }

    fn rk4(&self, s: f64, st: &[f64], dt: f64) -> Result<Vec<f64>> {
        let add = |a: &[f64], b: &[f64], c: f64| -> Vec<f64> { a.iter().zip(b).map(|(x, y)| x + c * y).collect() };
        let k1 = self.rhs(s, st)?;
        let k2 = self.rhs(s + 0.5 * dt, &add(st, &k1, 0.5 * dt))?;
        let k3 = self.rhs(s + 0.5 * dt, &add(st, &k2, 0.5 * dt))?;
        let k4 = self.rhs(s + dt, &add(st, &k3, dt))?;
        Ok((0..st.len())
            .map(|i| st[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
            .collect())
    }

    fn advance(&self, s0: f64, st: &[f64], s1: f64) -> Result<Vec<f64>> {
        let dt = (s1 - s0) / SUBSTEPS as f64;
        let mut cur = st.to_vec();
        for k in 0..SUBSTEPS {
            cur = self.rk4(s0 + dt * k as f64, &cur, dt)?;
        }
        Ok(cur)
    }

    fn build(side: &WeightedManifold, y: &[f64], s_max: f64, sign: f64) -> Result<JacobiTable> {
        let n = side.dim();
        let m = n - 1;
        let mut x = y.to_vec();
        x.push(0.0);
        let bg = boundary_geometry_at(&side.chart, &side.weight, side.glue_face().expect("glue face"), &x)?;
        let gy = bg.face_metric_matrix();
        let l = linalg::cholesky(&gy, m).ok_or_else(|| Error::DegenerateMetric {
            point: x.clone(),
            reason: "induced metric not positive".into(),
        })?;
        // E = L^{-T}: columns orthonormal for g_Y
        let li = linalg::lower_inverse(&l, m);
        let mut st = vec![0.0; n * m + 2 * m * m];
        let mut e: M4 = linalg::ZERO;
        for i in 0..m {
            for a in 0..m {
                e[i][a] = li[a][i];
                st[i * m + a] = li[a][i];
            }
        }
        let pi = bg.sff_matrix();
        for a in 0..m {
            st[n * m + a * m + a] = 1.0;
            for b in 0..m {
                // S in the frame: Π(E_a, E_b)
                let mut v = 0.0;
                for i in 0..m {
                    for k in 0..m {
                        v += pi[i][k] * e[i][a] * e[k][b];
                    }
                }
                st[n * m + m * m + a * m + b] = -v;
            }
        }
        let count = ((s_max / NODE_SPACING).ceil() as usize).max(1);
        let ds = s_max / count as f64;
        let mut table = JacobiTable {
            side: side.clone(),
            y: y.to_vec(),
            ds,
            nodes: vec![st],
        };
        for k in 0..count {
            let next = table.advance(ds * k as f64, &table.nodes[k], ds * (k + 1) as f64)?;
            let det = table.det_j(&next);
            if det <= FOCAL_DET {
                return Err(Error::FocalPoint {
                    t: sign * ds * (k + 1) as f64,
                });
            }
            table.nodes.push(next);
        }
        Ok(table)
    }

    fn det_j(&self, st: &[f64]) -> f64 {
        let n = self.n();
        let m = n - 1;
        let mut j = linalg::ZERO;
        for a in 0..m {
            for b in 0..m {
                j[a][b] = st[n * m + a * m + b];
            }
        }
        linalg::det(&j, m)
    }

    /// `h(s) = det J(s) · Φ(y, s)`.
    fn density(&self, s: f64) -> Result<f64> {
        let k = ((s / self.ds).floor() as usize).min(self.nodes.len() - 1);
        let s0 = self.ds * k as f64;
        let st = if s == s0 {
            self.nodes[k].clone()
        } else {
            self.advance(s0, &self.nodes[k], s)?
        };
        let det = self.det_j(&st);
        if det <= FOCAL_DET {
            return Err(Error::FocalPoint { t: s });
        }
        Ok(det * self.side.weight.value(&self.point(s))?)
    }
}

/// Needle density of the signed distance to Y through `y`, on
/// `t ∈ (t_min, t_max)`; `t > 0` runs into side 0.
pub fn disintegrate_signed_distance(gs: &CollarGluedSpace, y: &[f64], t_min: f64, t_max: f64) -> Result<NeedleDensity> {
    let n = gs.dim();
    if y.len() != n - 1 || !gs.y_box().contains(y) {
        return Err(Error::OutsideDomain { point: y.to_vec() });
    }
    if !(t_min < 0.0 && t_max > 0.0) || t_max > gs.depth(0) + 1e-12 || -t_min > gs.depth(1) + 1e-12 {
        return Err(Error::Invalid(format!(
            "range ({t_min}, {t_max}) must contain 0 and stay within the collars"
        )));
    }
    let right = Arc::new(JacobiTable::build(gs.side(0), y, t_max, 1.0)?);
    let left = Arc::new(JacobiTable::build(gs.side(1), y, -t_min, -1.0)?);
    NeedleDensity::new(
        t_min,
        t_max,
        Arc::new(move |t: f64| left.density(-t)),
        Arc::new(move |t: f64| right.density(t)),
        Provenance::Disintegration,
    )
}

/// `√(det g_Y(y, s) / det g_Y(y, 0)) · Φ(y, s)`, the needle density of a
/// Fermi chart read off the metric directly.
pub fn fermi_density(side: &WeightedManifold, y: &[f64], s: f64) -> Result<f64> {
    let m = side.dim() - 1;
    let tan = |s: f64| -> Result<f64> {
        let mut x = y.to_vec();
        x.push(s);
        let g = side.chart.metric_at(&x)?;
        let mut a = linalg::ZERO;
        for i in 0..m {
            for j in 0..m {
                a[i][j] = g[i][j];
            }
        }
        Ok(linalg::det(&a, m))
    };
    let mut x = y.to_vec();
    x.push(s);
    Ok((tan(s)? / tan(0.0)?).sqrt() * side.weight.value(&x)?)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LogDerivReport {
    pub y: Vec<f64>,
    pub d_plus_log: f64,
    pub d_minus_log: f64,
    /// H^{Φ₀}(y)
    pub h_phi0: f64,
    /// H^{Φ₁}(y)
    pub h_phi1: f64,
    /// max(|d⁺log h + H^{Φ₀}|, |d⁻log h − H^{Φ₁}|)
    pub deviation: f64,
    pub pass: bool,
}

/// One-sided log-derivatives of the needle density at `y` against the
/// weighted mean curvatures of both sides.
pub fn logderiv_vs_meancurv(gs: &CollarGluedSpace, y: &[f64]) -> Result<LogDerivReport> {
    let reach = |s: usize| gs.depth(s).min(0.5);
    let nd = disintegrate_signed_distance(gs, y, -reach(1), reach(0))?;
    let (d_minus_log, d_plus_log) = nd.log_derivatives()?;
    let mut x = y.to_vec();
    x.push(0.0);
    let face = gs.glue_face();
    let h0 = boundary_geometry_at(&gs.side(0).chart, &gs.side(0).weight, face, &x)?.h_phi;
    let h1 = boundary_geometry_at(&gs.side(1).chart, &gs.side(1).weight, face, &x)?.h_phi;
    let deviation = (d_plus_log + h0).abs().max((d_minus_log - h1).abs());
    Ok(LogDerivReport {
        y: y.to_vec(),
        d_plus_log,
        d_minus_log,
        h_phi0: h0,
        h_phi1: h1,
        deviation,
        pass: deviation <= LOGDERIV_TOL,
    })
}

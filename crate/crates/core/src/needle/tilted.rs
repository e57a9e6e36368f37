use serde::Serialize;

use crate::curvature::boundary::boundary_geometry_at;
use crate::curvature::manifold::WeightedManifold;
use crate::error::{Error, Result};
use crate::geom_core::linalg;
use crate::geom_core::tensor::Connection;
use crate::gluing::space::CollarGluedSpace;
use crate::numerics::one_sided_derivative;

pub const TILTED_TOL: f64 = 1e-3;
const STEP: f64 = 1e-3;
const SUBSTEPS: usize = 4;

/// The map `(y', s) ↦ exp_{y'}(s V(y'))` on one collar, `V = (σ â e₁, b)`
/// with `e₁ = v/|v|_{g_Y}`, together with its `y`-variations.
struct TiltedFlow<'a> {
    side: &'a WeightedManifold,
    y: Vec<f64>,
    v: Vec<f64>,
    a_hat: f64,
    b: f64,
    sign: f64,
}

impl TiltedFlow<'_> {
    fn n(&self) -> usize {
        self.side.dim()
    }

    /// State: x, x', then for each a: δx_a, δx_a'.
    fn initial(&self) -> Result<Vec<f64>> {
        let n = self.n();
        let m = n - 1;
        let mut x = self.y.clone();
        x.push(0.0);
        let mj = self.side.chart.metric_jet_unchecked(&x)?;
        let vv = linalg::quad(&mj.g, &self.v, &self.v, m);
        if vv <= 0.0 {
            return Err(Error::Invalid("tangent direction has zero length".into()));
        }
        let len = vv.sqrt();
        let mut st = x.clone();
        for k in 0..m {
            st.push(self.sign * self.a_hat * self.v[k] / len);
        }
        st.push(self.b);
        for a in 0..m {
            for k in 0..n {
                st.push(if k == a { 1.0 } else { 0.0 });
            }
            // ∂_a e₁ = −v (∂_a g_Y)(v, v) / (2|v|³)
            let dvv = linalg::quad(&mj.dg[a], &self.v, &self.v, m);
            for k in 0..m {
                st.push(-self.sign * self.a_hat * self.v[k] * dvv / (2.0 * len * len * len));
            }
            st.push(0.0);
        }
        Ok(st)
    }

    fn rhs(&self, st: &[f64]) -> Result<Vec<f64>> {
        let n = self.n();
        let m = n - 1;
        let x = &st[..n];
        let xp = &st[n..2 * n];
        let mj = self.side.chart.metric_jet_unchecked(x)?;
        let c = Connection::from_jet(&mj, x)?;
        let mut out = vec![0.0; st.len()];
        for k in 0..n {
            out[k] = xp[k];
            let mut acc = 0.0;
            for i in 0..n {
                for j in 0..n {
                    acc -= c.gamma[k][i][j] * xp[i] * xp[j];
                }
            }
            out[n + k] = acc;
        }
        for a in 0..m {
            let base = 2 * n + a * 2 * n;
            let dx = &st[base..base + n];
            let dxp = &st[base + n..base + 2 * n];
            for k in 0..n {
                out[base + k] = dxp[k];
                let mut acc = 0.0;
                for i in 0..n {
                    for j in 0..n {
                        let mut dg = 0.0;
                        for l in 0..n {
                            dg += c.dgamma[l][k][i][j] * dx[l];
                        }
                        acc -= dg * xp[i] * xp[j] + 2.0 * c.gamma[k][i][j] * xp[i] * dxp[j];
                    }
                }
                out[base + n + k] = acc;
            }
        }
        Ok(out)
    }

    fn flow(&self, s: f64) -> Result<Vec<f64>> {
        let mut st = self.initial()?;
        let dt = s / SUBSTEPS as f64;
        let add = |a: &[f64], b: &[f64], c: f64| -> Vec<f64> { a.iter().zip(b).map(|(x, y)| x + c * y).collect() };
        for _ in 0..SUBSTEPS {
            let k1 = self.rhs(&st)?;
            let k2 = self.rhs(&add(&st, &k1, 0.5 * dt))?;
            let k3 = self.rhs(&add(&st, &k2, 0.5 * dt))?;
            let k4 = self.rhs(&add(&st, &k3, dt))?;
            st = (0..st.len())
                .map(|i| st[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
                .collect();
        }
        Ok(st)
    }

    /// Jacobian density of the tilted map relative to `vol_Y ⊗ ds`, times Φ.
    fn density(&self, s: f64) -> Result<f64> {
        let n = self.n();
        let m = n - 1;
        let st = if s == 0.0 { self.initial()? } else { self.flow(s)? };
        let x = &st[..n];
        let mut cols = linalg::ZERO;
        for a in 0..m {
            let base = 2 * n + a * 2 * n;
            for k in 0..n {
                cols[k][a] = st[base + k];
            }
        }
        for k in 0..n {
            cols[k][m] = st[n + k];
        }
        let g = self.side.chart.metric_jet_unchecked(x)?.g;
        let mut y0 = self.y.clone();
        y0.push(0.0);
        let g0 = self.side.chart.metric_jet_unchecked(&y0)?.g;
        let gy_det = linalg::det(&g0, m);
        Ok((linalg::det(&g, n) / gy_det).sqrt() * linalg::det(&cols, n) * self.side.weight.value(x)?)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TiltedReport {
    pub y: Vec<f64>,
    pub b: f64,
    pub a_hat: f64,
    /// `d⁻h(0) − d⁺h(0)` from the integrated flows.
    pub numeric: f64,
    /// `b²(H^{Φ₀}+H^{Φ₁})Φ + â²(Π₀+Π₁)(e₁,e₁)Φ`.
    pub closed: f64,
    /// Relative to `max(|closed|, Φ)`.
    pub rel_deviation: f64,
    pub pass: bool,
}

/// Tilted-field needle at `y`: `V = â e₁ + b ν₀` with `â = √(1−b²)`.
pub fn tilted_needle_check(gs: &CollarGluedSpace, y: &[f64], v: &[f64], b: f64) -> Result<TiltedReport> {
    let n = gs.dim();
    let m = n - 1;
    if y.len() != m || v.len() != m {
        return Err(Error::Invalid("y and v must have the dimension of Y".into()));
    }
    if !(b.abs() <= 1.0) {
        return Err(Error::Invalid(format!("|b| = {} exceeds 1", b.abs())));
    }
    let a_hat = (1.0 - b * b).sqrt();
    let flows = [0, 1].map(|i| TiltedFlow {
        side: gs.side(i),
        y: y.to_vec(),
        v: v.to_vec(),
        a_hat,
        b,
        sign: if i == 0 { 1.0 } else { -1.0 },
    });
    let mut slopes = [0.0; 2];
    for (i, f) in flows.iter().enumerate() {
        slopes[i] = one_sided_derivative(|s| f.density(s), 0.0, 1.0, STEP)?;
    }
    // side 1 is traversed with t = −s
    let numeric = -slopes[0] - slopes[1];

    let mut x = y.to_vec();
    x.push(0.0);
    let face = gs.glue_face();
    let b0 = boundary_geometry_at(&gs.side(0).chart, &gs.side(0).weight, face, &x)?;
    let b1 = boundary_geometry_at(&gs.side(1).chart, &gs.side(1).weight, face, &x)?;
    let phi = gs.side(0).weight.value(&x)?;
    let gy = b0.face_metric_matrix();
    let len2 = linalg::quad(&gy, v, v, m);
    let pi_e1 = (linalg::quad(&b0.sff_matrix(), v, v, m) + linalg::quad(&b1.sff_matrix(), v, v, m)) / len2;
    let closed = b * b * (b0.h_phi + b1.h_phi) * phi + a_hat * a_hat * pi_e1 * phi;
    let rel_deviation = (numeric - closed).abs() / closed.abs().max(phi);
    Ok(TiltedReport {
        y: y.to_vec(),
        b,
        a_hat,
        numeric,
        closed,
        rel_deviation,
        pass: rel_deviation <= TILTED_TOL,
    })
}

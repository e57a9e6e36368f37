use rayon::prelude::*;
use serde::Serialize;

use crate::curvature::boundary::boundary_geometry_at;
use crate::curvature::manifold::{Face, FaceRole, Side, WeightedManifold};
use crate::error::{Error, Result};
use crate::geom_core::chart::{tensor_grid, CoordBox, MetricField, MetricJet, ScalarField, ScalarSource};
use crate::geom_core::linalg;
use crate::geom_core::scalar::{Scalar, Taylor2};
use crate::geom_core::tensor::min_generalized_eig_matrix;

pub const INTERFACE_TOL: f64 = 1e-9;
pub const COLLAR_TOL: f64 = 1e-9;
const INTERFACE_RES: usize = 17;
const COLLAR_RES: usize = 7;

/// Two weighted collars glued along `x^n = 0`. Glued coordinates are
/// `(y, t)` with `t = x^n` on side 0 and `t = −x^n` on side 1.
#[derive(Clone, Debug)]
pub struct CollarGluedSpace {
    sides: [WeightedManifold; 2],
    n: usize,
    y_box: CoordBox,
    /// `∂_n g_ab` of each side (tangential block, a ≤ b row-major).
    dn: [Vec<ScalarField>; 2],
}

impl CollarGluedSpace {
    pub fn side(&self, i: usize) -> &WeightedManifold {
        &self.sides[i]
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn y_box(&self) -> &CoordBox {
        &self.y_box
    }

    pub fn depth(&self, side: usize) -> f64 {
        self.sides[side].collar_depth()
    }

    /// Points of Y with `res` points per axis, endpoints included.
    pub fn y_grid(&self, res: usize) -> Vec<Vec<f64>> {
        let axes: Vec<Vec<f64>> = (0..self.n - 1)
            .map(|k| {
                let (a, b) = (self.y_box.lo[k], self.y_box.hi[k]);
                if res == 1 {
                    vec![0.5 * (a + b)]
                } else {
                    (0..res).map(|i| a + (b - a) * i as f64 / (res - 1) as f64).collect()
                }
            })
            .collect();
        tensor_grid(&axes)
    }

    /// Side-local coordinates of a glued point.
    pub fn to_side<T: Scalar>(&self, side: usize, x: &[T]) -> Vec<T> {
        let mut p = x.to_vec();
        if side == 1 {
            p[self.n - 1] = -p[self.n - 1];
        }
        p
    }

    /// Metric of one side at a glued point, in glued coordinates. No domain
    /// check: the side's analytic extension is used past its face.
    pub fn side_metric<T: Scalar>(&self, side: usize, x: &[T]) -> Result<Vec<Vec<T>>> {
        let p = self.to_side(side, x);
        let mut g = self.sides[side].chart.metric_at(&p)?;
        if side == 1 {
            let k = self.n - 1;
            for a in 0..k {
                g[a][k] = -g[a][k];
                g[k][a] = -g[k][a];
            }
        }
        Ok(g)
    }

    pub fn side_weight<T: Scalar>(&self, side: usize, x: &[T]) -> Result<T> {
        let p = self.to_side(side, x);
        self.sides[side].weight.eval(&p)
    }

    /// `∂_{x^n} g_ab` of one side at a glued point, tangential block, in
    /// that side's own normal coordinate.
    pub fn side_normal_derivative<T: Scalar>(&self, side: usize, x: &[T]) -> Result<Vec<Vec<T>>> {
        let p = self.to_side(side, x);
        let m = self.n - 1;
        let mut out = vec![vec![T::from_f64(0.0); m]; m];
        let mut idx = 0;
        for a in 0..m {
            for b in a..m {
                let v = self.dn[side][idx].eval(&p)?;
                out[a][b] = v;
                out[b][a] = v;
                idx += 1;
            }
        }
        Ok(out)
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        let k = self.n - 1;
        self.y_box.contains(&x[..k]) && x[k] >= -self.depth(1) - 1e-12 && x[k] <= self.depth(0) + 1e-12
    }

    pub fn side_of(&self, x: &[f64]) -> usize {
        if x[self.n - 1] >= 0.0 {
            0
        } else {
            1
        }
    }

    pub fn metric(&self) -> GluedMetric<'_> {
        GluedMetric { gs: self }
    }

    pub fn weight(&self) -> GluedWeight<'_> {
        GluedWeight { gs: self }
    }

    /// The glue face of either side.
    pub fn glue_face(&self) -> Face {
        Face {
            coord: self.n - 1,
            side: Side::Min,
            role: FaceRole::Glue,
        }
    }
}

/// Glues two collars after checking the interface and collar invariants.
pub fn assemble(side0: WeightedManifold, side1: WeightedManifold) -> Result<CollarGluedSpace> {
    let n = side0.dim();
    if side1.dim() != n {
        return Err(Error::Invalid(format!(
            "sides have dimensions {n} and {}",
            side1.dim()
        )));
    }
    if n < 2 {
        return Err(Error::Invalid(
            "collar gluing needs dimension at least 2; use glue_1d for intervals".into(),
        ));
    }
    for (i, s) in [&side0, &side1].iter().enumerate() {
        if s.glue_face().is_none() {
            return Err(Error::Invalid(format!("side {i} has no glue face")));
        }
    }
    let (d0, d1) = (side0.chart.domain(), side1.chart.domain());
    for k in 0..n - 1 {
        if (d0.lo[k] - d1.lo[k]).abs() > 1e-12 || (d0.hi[k] - d1.hi[k]).abs() > 1e-12 {
            return Err(Error::InterfaceMismatch(format!(
                "tangential coordinate x{} ranges differ",
                k + 1
            )));
        }
    }
    let y_box = CoordBox::new(d0.lo[..n - 1].to_vec(), d0.hi[..n - 1].to_vec())?;
    let dn = [&side0, &side1].map(|s| {
        let mut v = Vec::new();
        for a in 0..n - 1 {
            for b in a..n - 1 {
                v.push(s.chart.component(a, b).derivative(n - 1));
            }
        }
        v
    });
    let gs = CollarGluedSpace {
        sides: [side0, side1],
        n,
        y_box,
        dn,
    };
    gs.check_interface()?;
    for s in 0..2 {
        gs.check_collar(s)?;
    }
    Ok(gs)
}

impl CollarGluedSpace {
    fn check_interface(&self) -> Result<()> {
        let k = self.n - 1;
        for y in self.y_grid(INTERFACE_RES) {
            let mut x = y.clone();
            x.push(0.0);
            let g0 = self.sides[0].chart.metric_at(&x)?;
            let g1 = self.sides[1].chart.metric_at(&x)?;
            for a in 0..k {
                for b in 0..k {
                    let d = (g0[a][b] - g1[a][b]).abs();
                    if d > INTERFACE_TOL {
                        return Err(Error::InterfaceMismatch(format!(
                            "induced metrics differ by {d:e} at y = {y:?}"
                        )));
                    }
                }
            }
            let (p0, p1) = (self.sides[0].weight.value(&x)?, self.sides[1].weight.value(&x)?);
            if (p0 - p1).abs() > INTERFACE_TOL {
                return Err(Error::InterfaceMismatch(format!(
                    "weights differ ({p0} vs {p1}) at y = {y:?}"
                )));
            }
            if p0 <= 0.0 {
                return Err(Error::InterfaceMismatch(format!("weight {p0} not positive on Y at {y:?}")));
            }
        }
        Ok(())
    }

    fn check_collar(&self, side: usize) -> Result<()> {
        let d = self.sides[side].chart.domain();
        let axes: Vec<Vec<f64>> = (0..self.n)
            .map(|k| {
                (0..COLLAR_RES)
                    .map(|i| d.lo[k] + (d.hi[k] - d.lo[k]) * i as f64 / (COLLAR_RES - 1) as f64)
                    .collect()
            })
            .collect();
        let k = self.n - 1;
        for x in tensor_grid(&axes) {
            let g = self.sides[side].chart.metric_at(&x)?;
            let mut dev = (g[k][k] - 1.0).abs();
            for a in 0..k {
                dev = dev.max(g[a][k].abs());
            }
            if dev > COLLAR_TOL {
                return Err(Error::Invalid(format!(
                    "side {side} is not in collar (Fermi) form at {x:?}: deviation {dev:e}"
                )));
            }
        }
        Ok(())
    }
}

/// The piecewise glued metric in glued coordinates.
#[derive(Clone, Copy, Debug)]
pub struct GluedMetric<'a> {
    pub gs: &'a CollarGluedSpace,
}

impl MetricField for GluedMetric<'_> {
    fn dim(&self) -> usize {
        self.gs.n
    }

    fn metric_jet(&self, x: &[f64]) -> Result<MetricJet> {
        if !self.gs.contains(x) {
            return Err(Error::OutsideDomain { point: x.to_vec() });
        }
        self.metric_jet_on_side(x, self.gs.side_of(x))
    }

    fn interface(&self) -> Option<usize> {
        Some(self.gs.n - 1)
    }

    fn metric_jet_on_side(&self, x: &[f64], side: usize) -> Result<MetricJet> {
        let g = self.gs.side_metric(side, &Taylor2::seed(x))?;
        let mj = MetricJet::from_taylor(self.gs.n, &g);
        crate::geom_core::chart::check_nondegenerate(&mj.g, self.gs.n, x)?;
        Ok(mj)
    }

    fn contains(&self, x: &[f64]) -> bool {
        self.gs.contains(x)
    }
}

/// The piecewise glued weight in glued coordinates.
#[derive(Clone, Copy, Debug)]
pub struct GluedWeight<'a> {
    pub gs: &'a CollarGluedSpace,
}

impl ScalarSource for GluedWeight<'_> {
    fn scalar_jet(&self, x: &[f64]) -> Result<Taylor2> {
        self.scalar_jet_on_side(x, self.gs.side_of(x))
    }

    fn scalar_jet_on_side(&self, x: &[f64], side: usize) -> Result<Taylor2> {
        self.gs.side_weight(side, &Taylor2::seed(x))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CompatibilityRow {
    pub y: Vec<f64>,
    /// λ_min(Π₀+Π₁) relative to g_Y.
    pub lambda_min: f64,
    /// trΠ − ⟨ν₀,∇log Φ₀⟩ − ⟨ν₁,∇log Φ₁⟩.
    pub margin: f64,
    /// H^{Φ₀} + H^{Φ₁}.
    pub h_sum: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CompatibilityReport {
    pub rows: Vec<CompatibilityRow>,
    pub min_lambda: f64,
    pub min_margin: f64,
    pub min_h_sum: f64,
    pub pass: bool,
}

pub const COMPAT_TOL: f64 = -1e-8;

pub fn compatibility_report(gs: &CollarGluedSpace, y_res: usize) -> Result<CompatibilityReport> {
    let m = gs.n - 1;
    let face = gs.glue_face();
    let rows: Vec<Result<CompatibilityRow>> = gs
        .y_grid(y_res)
        .into_par_iter()
        .map(|y| {
            let mut x = y.clone();
            x.push(0.0);
            let b0 = boundary_geometry_at(&gs.sides[0].chart, &gs.sides[0].weight, face, &x)?;
            let b1 = boundary_geometry_at(&gs.sides[1].chart, &gs.sides[1].weight, face, &x)?;
            let gy = b0.face_metric_matrix();
            let (p0, p1) = (b0.sff_matrix(), b1.sff_matrix());
            let mut pi = linalg::ZERO;
            for a in 0..m {
                for b in 0..m {
                    pi[a][b] = p0[a][b] + p1[a][b];
                }
            }
            let lambda_min = min_generalized_eig_matrix(&pi, &gy, m)?;
            let gyi = linalg::inverse(&gy, m).ok_or_else(|| Error::DegenerateMetric {
                point: x.clone(),
                reason: "degenerate induced metric".into(),
            })?;
            let mut tr = 0.0;
            for a in 0..m {
                for b in 0..m {
                    tr += gyi[a][b] * pi[a][b];
                }
            }
            let nu_dlog = |side: usize, nu: &[f64]| -> Result<f64> {
                let phi = gs.sides[side].weight.taylor2(&x)?;
                Ok(nu.iter().zip(&phi.g).map(|(v, d)| v * d).sum::<f64>() / phi.v)
            };
            let margin = tr - nu_dlog(0, &b0.normal)? - nu_dlog(1, &b1.normal)?;
            Ok(CompatibilityRow {
                y,
                lambda_min,
                margin,
                h_sum: b0.h_phi + b1.h_phi,
            })
        })
        .collect();
    let rows = rows.into_iter().collect::<Result<Vec<_>>>()?;
    let min_of = |f: fn(&CompatibilityRow) -> f64| rows.iter().map(f).fold(f64::INFINITY, f64::min);
    let min_lambda = min_of(|r| r.lambda_min);
    let min_margin = min_of(|r| r.margin);
    let min_h_sum = min_of(|r| r.h_sum);
    Ok(CompatibilityReport {
        pass: min_lambda >= COMPAT_TOL && min_margin >= COMPAT_TOL,
        rows,
        min_lambda,
        min_margin,
        min_h_sum,
    })
}

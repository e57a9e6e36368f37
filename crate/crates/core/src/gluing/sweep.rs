use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::curvature::bakry_emery::{bakry_emery_from, WEIGHT_FLOOR};
use crate::error::{Error, Result};
use crate::geom_core::chart::{MetricField, ScalarSource};
use crate::geom_core::tensor::Connection;
use crate::gluing::deform::deform;
use crate::gluing::mollify::mollify;
use crate::gluing::profile::{CalFProfile, SmoothingProfile};
use crate::gluing::space::CollarGluedSpace;

/// Sampling and profile options shared by every δ of a sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepConfig {
    /// Points per tangential axis (interior grid of Y).
    pub y_res: usize,
    /// Uniform interior samples of the glued normal coordinate.
    pub t_res: usize,
    pub c: f64,
    pub cal: CalFProfile,
    pub f_scale: f64,
    /// Mollifier width as a power of δ.
    pub h_exponent: f64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            y_res: 4,
            t_res: 40,
            c: 1.0,
            cal: CalFProfile::DoubleIntegral,
            f_scale: 1.0,
            h_exponent: 5.0,
        }
    }
}

impl SweepConfig {
    pub fn profile(&self, delta: f64) -> Result<SmoothingProfile> {
        let mut p = SmoothingProfile::new(delta)?;
        p.c = self.c;
        p.cal = self.cal;
        p.f_scale = self.f_scale;
        p.h = delta.powf(self.h_exponent);
        Ok(p)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub delta: f64,
    pub sup_metric_distance: f64,
    pub min_bakry_emery_eig: f64,
    /// `K − min λ`.
    pub epsilon: f64,
    pub argmin: Vec<f64>,
    pub evaluated: usize,
}

/// Normal samples: a uniform grid plus points clustered at the scales h,
/// δ⁴ and δ on both sides, and `t = 0`.
pub fn normal_samples(gs: &CollarGluedSpace, p: &SmoothingProfile, t_res: usize) -> Vec<f64> {
    let (lo, hi) = (-gs.depth(1), gs.depth(0));
    let mut ts: Vec<f64> = (1..=t_res).map(|i| lo + (hi - lo) * i as f64 / (t_res + 1) as f64).collect();
    ts.push(0.0);
    let d4 = p.delta.powi(4);
    let mut scaled = Vec::new();
    for m in [0.25, 0.5, 1.0, 1.5, 2.0, 3.0] {
        scaled.push(p.h * m);
    }
    for i in 1..=40 {
        scaled.push(d4 * 0.05 * i as f64);
    }
    for i in 1..=20 {
        scaled.push(p.delta * 0.05 * i as f64);
    }
    for s in scaled {
        ts.push(s);
        ts.push(-s);
    }
    ts.retain(|t| *t > lo && *t < hi);
    ts.sort_by(f64::total_cmp);
    ts.dedup();
    ts
}

fn sweep_points(gs: &CollarGluedSpace, p: &SmoothingProfile, cfg: &SweepConfig) -> Vec<Vec<f64>> {
    let ys = gs.y_box().interior_grid(cfg.y_res);
    let ts = normal_samples(gs, p, cfg.t_res);
    let mut pts = Vec::with_capacity(ys.len() * ts.len());
    for y in &ys {
        for &t in &ts {
            let mut x = y.clone();
            x.push(t);
            pts.push(x);
        }
    }
    pts
}

/// One row per δ: distance to the glued metric, and the smallest
/// Bakry-Émery eigenvalue of the smoothed space.
pub fn smoothing_sweep(
    gs: &CollarGluedSpace,
    n_synth: f64,
    k: f64,
    deltas: &[f64],
    cfg: &SweepConfig,
) -> Result<Vec<SweepRow>> {
    if deltas.is_empty() {
        return Err(Error::Invalid("no δ values given".into()));
    }
    let glued = gs.metric();
    deltas
        .iter()
        .map(|&delta| {
            let profile = cfg.profile(delta)?;
            let dm = deform(gs, profile)?;
            let sm = mollify(dm)?;
            let sw = sm.weight();
            let points = sweep_points(gs, &profile, cfg);
            let vals: Vec<Result<(f64, Option<f64>)>> = points
                .par_iter()
                .map(|x| {
                    let mj = sm.metric_jet(x)?;
                    let g0 = glued.metric_jet(x)?;
                    let n = gs.dim();
                    let mut dist: f64 = 0.0;
                    for i in 0..n {
                        for j in 0..n {
                            dist = dist.max((mj.g[i][j] - g0.g[i][j]).abs());
                        }
                    }
                    let phi = sw.scalar_jet(x)?;
                    if phi.v < WEIGHT_FLOOR {
                        return Ok((dist, None));
                    }
                    let c = Connection::from_jet(&mj, x)?;
                    let be = bakry_emery_from(&c, &phi, n_synth, x)?;
                    Ok((dist, Some(be.lambda_min()?)))
                })
                .collect();
            let mut sup: f64 = 0.0;
            let mut best: Option<(f64, usize)> = None;
            let mut evaluated = 0;
            for (i, v) in vals.into_iter().enumerate() {
                let (d, l) = v?;
                sup = sup.max(d);
                if let Some(l) = l {
                    evaluated += 1;
                    if best.is_none_or(|(b, _)| l < b) {
                        best = Some((l, i));
                    }
                }
            }
            let (min_eig, idx) = best.ok_or_else(|| Error::Invalid("empty effective grid".into()))?;
            Ok(SweepRow {
                delta,
                sup_metric_distance: sup,
                min_bakry_emery_eig: min_eig,
                epsilon: k - min_eig,
                argmin: points[idx].clone(),
                evaluated,
            })
        })
        .collect()
}

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::curvature::manifold::WeightedManifold;
use crate::error::{Error, Result};
use crate::geom_core::chart::MetricField;
use crate::geom_core::scalar::{Scalar, Taylor2};
use crate::geom_core::tensor::{hessian_grad_from, max_generalized_eig_matrix, Connection};

pub const CHECK_TOL: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WeightConcavityReport {
    pub theta: f64,
    /// Max over the grid of the largest eigenvalue of ∇²f + θ f g relative to g.
    pub max_eig: f64,
    pub argmax: Vec<f64>,
    pub pass: bool,
}

/// `f = Φ^{1/(N−n)}` as a jet.
pub(crate) fn warp_jet(phi: Taylor2, gap: f64) -> Taylor2 {
    phi.powf(1.0 / gap)
}

fn require_supercritical(wm: &WeightedManifold) -> Result<f64> {
    let gap = wm.n_synth - wm.dim() as f64;
    if gap <= 1e-12 {
        return Err(Error::Invalid(format!(
            "check undefined for N = {} and n = {}",
            wm.n_synth,
            wm.dim()
        )));
    }
    Ok(gap)
}

/// Largest value of `score` over the points, reduced in grid order.
pub(crate) fn grid_max<F>(points: &[Vec<f64>], score: F) -> Result<(f64, Vec<f64>)>
where
    F: Fn(&[f64]) -> Result<f64> + Sync,
{
    let vals: Vec<Result<f64>> = points.par_iter().map(|p| score(p)).collect();
    let mut best: Option<(f64, usize)> = None;
    for (i, v) in vals.into_iter().enumerate() {
        let v = v?;
        if best.is_none_or(|(b, _)| v > b) {
            best = Some((v, i));
        }
    }
    let (v, i) = best.ok_or_else(|| Error::Invalid("empty grid".into()))?;
    Ok((v, points[i].clone()))
}

/// Checks `∇²f + θ f g ≤ 0` with `f = Φ^{1/(N−n)}` and `θ = min(−κ̄, η)`.
pub fn weight_concavity_check(
    wm: &WeightedManifold,
    kappa_bar: f64,
    eta: f64,
    resolution: usize,
) -> Result<WeightConcavityReport> {
    let gap = require_supercritical(wm)?;
    let theta = (-kappa_bar).min(eta);
    let points = wm.chart.domain().interior_grid(resolution);
    let (max_eig, argmax) = grid_max(&points, |p| {
        let phi = wm.weight.taylor2(p)?;
        if phi.v <= 0.0 {
            return Err(Error::EvalDomain(format!("weight not positive at {p:?}")));
        }
        let f = warp_jet(phi, gap);
        let mj = wm.chart.metric_jet(p)?;
        let c = Connection::from_jet(&mj, p)?;
        let mut h = c.hessian(&f);
        let n = c.n;
        for i in 0..n {
            for j in 0..n {
                h[i][j] += theta * f.v * c.g[i][j];
            }
        }
        max_generalized_eig_matrix(&h, &c.g, n)
    })?;
    Ok(WeightConcavityReport {
        theta,
        max_eig,
        argmax,
        pass: max_eig <= CHECK_TOL,
    })
}

/// Whether condition (2) compares against `L` or `L²`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LNorm {
    #[default]
    Linear,
    Squared,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AlbiReport {
    /// max (k f² − L)
    pub max_level: f64,
    pub argmax_level: Vec<f64>,
    /// max (|∇f|² + k f² − L^p)
    pub max_gradient: f64,
    pub argmax_gradient: Vec<f64>,
    pub pass: bool,
}

pub fn albi_check(
    wm: &WeightedManifold,
    k: f64,
    l: f64,
    norm: LNorm,
    resolution: usize,
) -> Result<AlbiReport> {
    let gap = require_supercritical(wm)?;
    let lp = match norm {
        LNorm::Linear => l,
        LNorm::Squared => l * l,
    };
    let points = wm.chart.domain().interior_grid(resolution);
    let eval = |p: &[f64]| -> Result<(f64, f64)> {
        let phi = wm.weight.taylor2(p)?;
        if phi.v <= 0.0 {
            return Err(Error::EvalDomain(format!("weight not positive at {p:?}")));
        }
        let f = warp_jet(phi, gap);
        let mj = wm.chart.metric_jet(p)?;
        let c = Connection::from_jet(&mj, p)?;
        let hg = hessian_grad_from(&c, &f, p);
        Ok((f.v, hg.gradnormsq))
    };
    let (max_level, argmax_level) = grid_max(&points, |p| {
        let (f, _) = eval(p)?;
        Ok(k * f * f - l)
    })?;
    let (max_gradient, argmax_gradient) = grid_max(&points, |p| {
        let (f, g2) = eval(p)?;
        Ok(g2 + k * f * f - lp)
    })?;
    Ok(AlbiReport {
        pass: max_level <= CHECK_TOL && max_gradient <= CHECK_TOL,
        max_level,
        argmax_level,
        max_gradient,
        argmax_gradient,
    })
}

/// Value of `f = Φ^{1/(N−n)}` at a point.
pub fn warp_factor_value(wm: &WeightedManifold, p: &[f64]) -> Result<f64> {
    let gap = require_supercritical(wm)?;
    let phi = wm.weight.value(p)?;
    if phi < 0.0 {
        return Err(Error::EvalDomain(format!("weight negative at {p:?}")));
    }
    Ok(phi.powf(1.0 / gap))
}

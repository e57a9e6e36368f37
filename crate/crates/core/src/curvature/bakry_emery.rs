use rayon::prelude::*;
use serde::Serialize;

use crate::curvature::manifold::WeightedManifold;
use crate::error::{Error, Result};
use crate::geom_core::chart::{MetricField, ScalarSource};
use crate::geom_core::linalg::{self, M4};
use crate::geom_core::scalar::{Scalar, Taylor2};
use crate::geom_core::tensor::{
    curvature_from, min_generalized_eig_matrix, Connection, TensorKind, TensorValue,
};

/// Weight values below this are excluded from sweeps.
pub const WEIGHT_FLOOR: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "branch", rename_all = "snake_case")]
pub enum Branch {
    /// N > n: the tensor is finite.
    Finite,
    /// N = n: finite on the kernel of `covector = d log Φ`, −∞ elsewhere.
    Critical { covector: Vec<f64> },
    /// N < n.
    MinusInfinity,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BakryEmery {
    pub tensor: Option<TensorValue>,
    pub branch: Branch,
    /// Metric at the point, for eigenvalue queries.
    #[serde(skip)]
    pub g: M4,
}

impl BakryEmery {
    /// Smallest eigenvalue relative to g, with −∞ for the degenerate branches.
    pub fn lambda_min(&self) -> Result<f64> {
        match &self.branch {
            Branch::MinusInfinity => Ok(f64::NEG_INFINITY),
            Branch::Critical { covector } => {
                let t = self.tensor.as_ref().expect("critical branch carries a tensor");
                if covector_norm(&self.g, covector, t.dim) > 1e-12 {
                    Ok(f64::NEG_INFINITY)
                } else {
                    min_generalized_eig_matrix(&t.matrix(), &self.g, t.dim)
                }
            }
            Branch::Finite => {
                let t = self.tensor.as_ref().expect("finite branch carries a tensor");
                min_generalized_eig_matrix(&t.matrix(), &self.g, t.dim)
            }
        }
    }
}

/// `|ω|_g` for a covector ω.
pub fn covector_norm(g: &M4, covector: &[f64], n: usize) -> f64 {
    match linalg::inverse(g, n) {
        Some(gi) => linalg::quad(&gi, covector, covector, n).max(0.0).sqrt(),
        None => f64::INFINITY,
    }
}

/// Bakry-Émery N-Ricci tensor from a connection, the weight jet and N.
pub fn bakry_emery_from(c: &Connection, phi: &Taylor2, n_synth: f64, x: &[f64]) -> Result<BakryEmery> {
    let n = c.n;
    if phi.v <= 0.0 || !phi.v.is_finite() {
        return Err(Error::EvalDomain(format!("weight {} is not positive at {x:?}", phi.v)));
    }
    let gap = n_synth - n as f64;
    if gap < -1e-12 {
        return Ok(BakryEmery {
            tensor: None,
            branch: Branch::MinusInfinity,
            g: c.g,
        });
    }
    let ric = curvature_from(c, x).ricci.matrix();
    let mut t = linalg::ZERO;
    let branch;
    if gap.abs() <= 1e-12 {
        let lp = phi.ln();
        let h = c.hessian(&lp);
        for i in 0..n {
            for j in 0..n {
                t[i][j] = ric[i][j] - h[i][j];
            }
        }
        branch = Branch::Critical {
            covector: lp.g[..n].to_vec(),
        };
    } else {
        let f = phi.powf(1.0 / gap);
        let h = c.hessian(&f);
        for i in 0..n {
            for j in 0..n {
                t[i][j] = ric[i][j] - gap * h[i][j] / f.v;
            }
        }
        branch = Branch::Finite;
    }
    Ok(BakryEmery {
        tensor: Some(TensorValue::from_matrix(TensorKind::Bilinear, &t, n, x)),
        branch,
        g: c.g,
    })
}

pub fn bakry_emery_at(
    metric: &dyn MetricField,
    weight: &dyn ScalarSource,
    n_synth: f64,
    x: &[f64],
) -> Result<BakryEmery> {
    let mj = metric.metric_jet(x)?;
    let c = Connection::from_jet(&mj, x)?;
    let phi = weight.scalar_jet(x)?;
    bakry_emery_from(&c, &phi, n_synth, x)
}

pub fn bakry_emery(wm: &WeightedManifold, x: &[f64]) -> Result<BakryEmery> {
    bakry_emery_at(&wm.chart, &wm.weight, wm.n_synth, x)
}

/// Outcome of a grid minimum of λ_min(Ric^{Φ,N}, g).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepMin {
    pub min_eig: f64,
    pub argmin: Vec<f64>,
    pub evaluated: usize,
    /// Points where Φ < 1e−12, excluded from the minimum.
    pub skipped: Vec<Vec<f64>>,
}

/// Minimum of λ_min over `points`, evaluated in parallel and reduced in
/// grid order (first minimum wins).
pub fn sweep_min(
    metric: &dyn MetricField,
    weight: &dyn ScalarSource,
    n_synth: f64,
    points: &[Vec<f64>],
) -> Result<SweepMin> {
    let vals: Vec<Result<Option<f64>>> = points
        .par_iter()
        .map(|p| {
            let phi = weight.scalar_jet(p)?;
            if phi.value() < WEIGHT_FLOOR {
                return Ok(None);
            }
            let mj = metric.metric_jet(p)?;
            let c = Connection::from_jet(&mj, p)?;
            let be = bakry_emery_from(&c, &phi, n_synth, p)?;
            be.lambda_min().map(Some)
        })
        .collect();
    let mut best: Option<(f64, usize)> = None;
    let mut skipped = Vec::new();
    let mut evaluated = 0;
    for (i, v) in vals.into_iter().enumerate() {
        match v? {
            None => skipped.push(points[i].clone()),
            Some(l) => {
                evaluated += 1;
                if best.is_none_or(|(b, _)| l < b) {
                    best = Some((l, i));
                }
            }
        }
    }
    let (min_eig, idx) = best.ok_or_else(|| Error::Invalid("empty effective grid".into()))?;
    Ok(SweepMin {
        min_eig,
        argmin: points[idx].clone(),
        evaluated,
        skipped,
    })
}

pub fn ricci_bound_sweep(wm: &WeightedManifold, resolution: usize) -> Result<SweepMin> {
    let points = wm.chart.domain().interior_grid(resolution);
    sweep_min(&wm.chart, &wm.weight, wm.n_synth, &points)
}

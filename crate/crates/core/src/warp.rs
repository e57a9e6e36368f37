//! Warped products `M ×_f rS^m` over a weighted base, evaluated through
//! closed formulas, and the hypothesis checks that go with them.

use serde::Serialize;

use crate::curvature::bakry_emery::bakry_emery_from;
use crate::curvature::boundary::boundary_geometry_from;
use crate::curvature::checks::grid_max;
use crate::curvature::manifold::{Face, FaceRole, Side, WeightedManifold};
use crate::error::{Error, Result};
use crate::geom_core::chart::{tensor_grid, CoordBox, MetricChart, MetricField, ScalarField};
use crate::geom_core::expr::Expr;
use crate::geom_core::linalg;
use crate::geom_core::scalar::{Scalar, Taylor2};
use crate::geom_core::tensor::{curvature_from, hessian_grad_from, max_generalized_eig_matrix, Connection};

pub const WARP_TOL: f64 = 1e-8;
const VALIDATION_RES: usize = 9;

#[derive(Clone, Debug)]
pub struct WarpedProductSpec {
    pub base: WeightedManifold,
    /// Warping function, `Φ^{1/(N−n)}` unless given explicitly.
    pub f: ScalarField,
    /// Fiber dimension `⌈N⌉ − n`.
    pub m: usize,
    /// Fiber radius.
    pub r: f64,
}

fn fiber_dim(base: &WeightedManifold) -> Result<usize> {
    let n = base.dim();
    let gap = base.n_synth - n as f64;
    if gap <= 1e-12 {
        return Err(Error::Invalid(format!(
            "no fiber: N = {} equals the base dimension {n}",
            base.n_synth
        )));
    }
    Ok((base.n_synth - 1e-12).ceil() as usize - n)
}

/// Grid with `res` points per axis including the faces.
fn closed_grid(d: &CoordBox, res: usize) -> Vec<Vec<f64>> {
    let axes: Vec<Vec<f64>> = (0..d.dim())
        .map(|k| (0..res).map(|i| d.lo[k] + (d.hi[k] - d.lo[k]) * i as f64 / (res - 1) as f64).collect())
        .collect();
    tensor_grid(&axes)
}

impl WarpedProductSpec {
    /// Uses `f = Φ^{1/(N−n)}`.
    pub fn new(base: WeightedManifold, r: f64) -> Result<Self> {
        let m = fiber_dim(&base)?;
        let gap = base.n_synth - base.dim() as f64;
        let expr = Expr::Pow(Box::new(base.weight.expr().clone()), Box::new(Expr::Num(1.0 / gap)));
        let f = ScalarField::from_expr(expr, base.dim())?;
        Self::checked(base, f, m, r)
    }

    /// Uses an explicit warping function, which must satisfy
    /// `f^{N−n} = Φ`; needed where `Φ` vanishes and the power is not
    /// differentiable.
    pub fn with_warp_factor(base: WeightedManifold, f: ScalarField, r: f64) -> Result<Self> {
        let m = fiber_dim(&base)?;
        if f.arity() != base.dim() {
            return Err(Error::Invalid("warping function arity differs from the base".into()));
        }
        let gap = base.n_synth - base.dim() as f64;
        for p in closed_grid(base.chart.domain(), VALIDATION_RES) {
            let (fv, phi) = (f.value(&p)?, base.weight.value(&p)?);
            if fv < 0.0 {
                return Err(Error::Invalid(format!("warping function negative at {p:?}")));
            }
            if (fv.powf(gap) - phi).abs() > 1e-9 * (1.0 + phi.abs()) {
                return Err(Error::Invalid(format!(
                    "f^(N−n) = {} differs from Φ = {phi} at {p:?}",
                    fv.powf(gap)
                )));
            }
        }
        Self::checked(base, f, m, r)
    }

    fn checked(base: WeightedManifold, f: ScalarField, m: usize, r: f64) -> Result<Self> {
        if !(r > 0.0 && r.is_finite()) {
            return Err(Error::Invalid(format!("fiber radius {r} must be positive")));
        }
        for p in base.chart.domain().interior_grid(VALIDATION_RES) {
            let v = f.value(&p)?;
            if v <= 0.0 {
                return Err(Error::Invalid(format!("warping function {v} not positive at interior point {p:?}")));
            }
        }
        Ok(WarpedProductSpec { base, f, m, r })
    }

    fn jets(&self, p: &[f64]) -> Result<(Connection, Taylor2)> {
        let f = self.f.taylor2(p)?;
        if f.v <= 0.0 {
            return Err(Error::EvalDomain(format!("warping function vanishes at {p:?}")));
        }
        let mj = self.base.chart.metric_jet(p)?;
        Ok((Connection::from_jet(&mj, p)?, f))
    }

    /// Chart of `g_M + f²r² dφ²` on `box × [0, 2π]`, for a one-dimensional
    /// fiber. Used to cross-check the closed formulas.
    pub fn product_chart_1d_fiber(&self) -> Result<MetricChart> {
        let n = self.base.dim();
        if self.m != 1 {
            return Err(Error::Invalid(format!("fiber dimension {} is not 1", self.m)));
        }
        if n + 1 > crate::geom_core::expr::MAX_ARITY {
            return Err(Error::Invalid("base too large for a product chart".into()));
        }
        let d = self.base.chart.domain();
        let mut lo = d.lo.clone();
        let mut hi = d.hi.clone();
        lo.push(0.0);
        hi.push(2.0 * std::f64::consts::PI);
        let mut comps = Vec::new();
        for i in 0..=n {
            for j in i..=n {
                let e = if j < n {
                    self.base.chart.component(i, j).expr().clone()
                } else if i < n {
                    Expr::Num(0.0)
                } else {
                    Expr::Mul(
                        Box::new(Expr::Pow(Box::new(self.f.expr().clone()), Box::new(Expr::Num(2.0)))),
                        Box::new(Expr::Num(self.r * self.r)),
                    )
                };
                comps.push(ScalarField::from_expr(e, n + 1)?);
            }
        }
        MetricChart::new(CoordBox::new(lo, hi)?, comps)
    }
}

/// `Ric(ξ+v, ξ+v)` of the warped product, with `v` given through its
/// squared length in the unit fiber.
pub fn warped_ricci(spec: &WarpedProductSpec, p: &[f64], xi: &[f64], v_fiber_sq: f64) -> Result<f64> {
    let (c, f) = spec.jets(p)?;
    let n = c.n;
    if xi.len() != n {
        return Err(Error::Invalid("ξ must have the base dimension".into()));
    }
    let ric = curvature_from(&c, p).ricci.matrix();
    let hg = hessian_grad_from(&c, &f, p);
    let hess = hg.hess.matrix();
    let m = spec.m as f64;
    let horizontal = linalg::quad(&ric, xi, xi, n) - m * linalg::quad(&hess, xi, xi, n) / f.v;
    let vert_len = f.v * f.v * spec.r * spec.r * v_fiber_sq;
    let vertical = (m - 1.0) * v_fiber_sq - (hg.laplacian / f.v + (m - 1.0) * hg.gradnormsq / (f.v * f.v)) * vert_len;
    Ok(horizontal + vertical)
}

/// `Π̃((ξ,v),(χ,w)) = Π(ξ,χ) − g(ν, ∇log f) f² r² (v·w)` on a face.
pub fn warped_boundary_sff(
    spec: &WarpedProductSpec,
    face: Face,
    p: &[f64],
    xi: &[f64],
    chi: &[f64],
    v: &[f64],
    w: &[f64],
) -> Result<f64> {
    let (c, f) = spec.jets(p)?;
    let dlog: Vec<f64> = (0..c.n).map(|i| f.g[i] / f.v).collect();
    let bg = boundary_geometry_from(&c, &dlog, face, p)?;
    let k = c.n - 1;
    if xi.len() != k || chi.len() != k || v.len() != w.len() {
        return Err(Error::Invalid("vector lengths do not match the face and fiber".into()));
    }
    let nu_dlog: f64 = bg.normal.iter().zip(&dlog).map(|(a, b)| a * b).sum();
    let vw: f64 = v.iter().zip(w).map(|(a, b)| a * b).sum();
    Ok(linalg::quad(&bg.sff_matrix(), xi, chi, k) - nu_dlog * f.v * f.v * spec.r * spec.r * vw)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FiberRadius {
    pub l_tilde: f64,
    pub r: f64,
    /// `L̃ ≤ 0` or `m = 1`: the radius is unconstrained and set to 1.
    pub unconstrained: bool,
}

/// `L̃ = L + (N−1)(η − θ max f)/(m−1)` and `r = 1/√L̃`.
pub fn fiber_radius(base: &WeightedManifold, kappa_bar: f64, eta: f64, l: f64, resolution: usize) -> Result<FiberRadius> {
    let m = fiber_dim(base)?;
    let gap = base.n_synth - base.dim() as f64;
    let theta = (-kappa_bar).min(eta);
    let mut max_f: f64 = 0.0;
    for p in closed_grid(base.chart.domain(), resolution.max(2)) {
        let phi = base.weight.value(&p)?;
        max_f = max_f.max(phi.max(0.0).powf(1.0 / gap));
    }
    if m == 1 {
        return Ok(FiberRadius {
            l_tilde: f64::NAN,
            r: 1.0,
            unconstrained: true,
        });
    }
    let l_tilde = l + (base.n_synth - 1.0) * (eta - theta * max_f) / (m as f64 - 1.0);
    if l_tilde <= 0.0 {
        return Ok(FiberRadius {
            l_tilde,
            r: 1.0,
            unconstrained: true,
        });
    }
    Ok(FiberRadius {
        l_tilde,
        r: 1.0 / l_tilde.sqrt(),
        unconstrained: false,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CollapseReport {
    pub max_deviation: f64,
    pub argmax: Vec<f64>,
    pub pass: bool,
}

/// Compares `warped_ricci(ξ, 0)` with the Bakry-Émery tensor of
/// `(M, f^m)` at dimension `n + m` over the interior grid, along the
/// coordinate directions and their pairwise sums.
pub fn collapse_identity_check(spec: &WarpedProductSpec, resolution: usize) -> Result<CollapseReport> {
    let n = spec.base.dim();
    let points = spec.base.chart.domain().interior_grid(resolution);
    let mut dirs: Vec<Vec<f64>> = Vec::new();
    for i in 0..n {
        for j in i..n {
            let mut d = vec![0.0; n];
            d[i] += 1.0;
            d[j] += 1.0;
            dirs.push(d);
        }
    }
    let (max_deviation, argmax) = grid_max(&points, |p| {
        let (c, f) = spec.jets(p)?;
        let phi = f.powi(spec.m as i32);
        let be = bakry_emery_from(&c, &phi, (n + spec.m) as f64, p)?;
        let t = be.tensor.as_ref().expect("supercritical branch").matrix();
        let mut dev: f64 = 0.0;
        for d in &dirs {
            let norm = linalg::quad(&c.g, d, d, n).sqrt();
            let u: Vec<f64> = d.iter().map(|x| x / norm).collect();
            let a = warped_ricci(spec, p, &u, 0.0)?;
            let b = linalg::quad(&t, &u, &u, n);
            dev = dev.max((a - b).abs());
        }
        Ok(dev)
    })?;
    Ok(CollapseReport {
        pass: max_deviation <= WARP_TOL,
        max_deviation,
        argmax,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KettererReport {
    /// Max eigenvalue of `∇²f + κ f g` relative to g.
    pub max_concavity: f64,
    pub argmax_concavity: Vec<f64>,
    /// Max of `|∇f| − √K_F` over zero-set faces, if any.
    pub max_gradient_excess: Option<f64>,
    pub argmax_gradient: Option<Vec<f64>>,
    pub pass: bool,
}

pub fn ketterer_hypothesis_check(spec: &WarpedProductSpec, kappa: f64, k_f: f64, resolution: usize) -> Result<KettererReport> {
    let wm = &spec.base;
    let points = wm.chart.domain().interior_grid(resolution);
    let (max_concavity, argmax_concavity) = grid_max(&points, |p| {
        let f = spec.f.taylor2(p)?;
        let mj = wm.chart.metric_jet(p)?;
        let c = Connection::from_jet(&mj, p)?;
        let mut h = c.hessian(&f);
        for i in 0..c.n {
            for j in 0..c.n {
                h[i][j] += kappa * f.v * c.g[i][j];
            }
        }
        max_generalized_eig_matrix(&h, &c.g, c.n)
    })?;
    let sk = k_f.max(0.0).sqrt();
    let mut face_points = Vec::new();
    for face in wm.faces.iter().filter(|f| f.role == FaceRole::ZeroSet) {
        face_points.extend(wm.face_grid(*face, resolution.max(2)));
    }
    let (max_gradient_excess, argmax_gradient) = if face_points.is_empty() {
        (None, None)
    } else {
        let (v, p) = grid_max(&face_points, |p| {
            let f = spec.f.taylor2(p)?;
            let mj = wm.chart.metric_jet(p)?;
            let c = Connection::from_jet(&mj, p)?;
            Ok(hessian_grad_from(&c, &f, p).gradnormsq.max(0.0).sqrt() - sk)
        })?;
        (Some(v), Some(p))
    };
    Ok(KettererReport {
        pass: max_concavity <= WARP_TOL && max_gradient_excess.is_none_or(|v| v <= WARP_TOL),
        max_concavity,
        argmax_concavity,
        max_gradient_excess,
        argmax_gradient,
    })
}

/// The face `x^coord = lo` of the base, for sff queries.
pub fn min_face(coord: usize, role: FaceRole) -> Face {
    Face {
        coord,
        side: Side::Min,
        role,
    }
}

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geom_core::chart::{check_nondegenerate, MetricField, MetricJet};
use crate::geom_core::linalg::{self, inverse_t};
use crate::geom_core::scalar::{Scalar, Taylor2};
use crate::gluing::profile::SmoothingProfile;
use crate::gluing::space::CollarGluedSpace;

const PD_Y_RES: usize = 9;
const PD_T_RES: usize = 41;

/// Side 0 replaced by `g0 + 2F·B − 2C𝓕·g0|tan`, where `B` is `Π₀+Π₁`
/// transported along the normal geodesics (`∇_t L = 0` for the associated
/// endomorphism). Side 1 is untouched.
#[derive(Clone, Copy, Debug)]
pub struct DeformedMetric<'a> {
    pub gs: &'a CollarGluedSpace,
    pub profile: SmoothingProfile,
    steps: usize,
    /// `Π₀+Π₁` vanishes identically near the sampled Y points.
    flat_interface: bool,
}

impl<'a> DeformedMetric<'a> {
    pub fn dim(&self) -> usize {
        self.gs.dim()
    }

    /// Deformed metric of a side at a glued point (no domain check).
    pub fn side_metric<T: Scalar>(&self, side: usize, x: &[T]) -> Result<Vec<Vec<T>>> {
        let mut g = self.gs.side_metric(side, x)?;
        if side == 1 {
            return Ok(g);
        }
        let n = self.gs.dim();
        let m = n - 1;
        let t = x[m];
        if t.value() >= self.profile.delta {
            return Ok(g);
        }
        let cf = self.profile.cal_f(t) * self.profile.c;
        let use_f = self.profile.f_scale != 0.0 && !self.flat_interface;
        let bt = if use_f {
            let f = self.profile.f(t);
            Some((f, self.transported(x)?))
        } else {
            None
        };
        for a in 0..m {
            for b in 0..m {
                let mut v = g[a][b] - cf * g[a][b] * 2.0;
                if let Some((f, bm)) = &bt {
                    v = v + *f * bm[a][b] * 2.0;
                }
                g[a][b] = v;
            }
        }
        Ok(g)
    }

    /// `B(y, 0) = −½∂_n g₀ − ½∂_n g₁ = Π₀ + Π₁`.
    fn initial<T: Scalar>(&self, y: &[T]) -> Result<Vec<Vec<T>>> {
        let mut p = y.to_vec();
        p.push(T::from_f64(0.0));
        let d0 = self.gs.side_normal_derivative(0, &p)?;
        let d1 = self.gs.side_normal_derivative(1, &p)?;
        Ok(d0
            .iter()
            .zip(&d1)
            .map(|(r0, r1)| r0.iter().zip(r1).map(|(a, b)| (*a + *b) * -0.5).collect())
            .collect())
    }

    /// `M = ½ g_tan⁻¹ ∂_n g_tan` on side 0.
    fn generator<T: Scalar>(&self, y: &[T], s: T) -> Result<Vec<Vec<T>>> {
        let mut p = y.to_vec();
        p.push(s);
        let g = self.gs.side_metric(0, &p)?;
        let m = y.len();
        let gt: Vec<Vec<T>> = (0..m).map(|a| g[a][..m].to_vec()).collect();
        let gi = inverse_t(&gt).ok_or_else(|| Error::DegenerateMetric {
            point: p.iter().map(|v| v.value()).collect(),
            reason: "tangential block singular".into(),
        })?;
        let dn = self.gs.side_normal_derivative(0, &p)?;
        Ok(mat_mul_t(&gi, &dn).into_iter().map(|r| r.into_iter().map(|v| v * 0.5).collect()).collect())
    }

    /// RK4 for `∂_t B = MᵀB + BM` from 0 to `t` with a fixed step count, so
    /// the result is a smooth function of `(y, t)`.
    fn transported<T: Scalar>(&self, x: &[T]) -> Result<Vec<Vec<T>>> {
        let m = self.gs.dim() - 1;
        let y = &x[..m];
        let t = x[m];
        let mut b = self.initial(y)?;
        let dt = t * (1.0 / self.steps as f64);
        let rhs = |s: T, b: &Vec<Vec<T>>| -> Result<Vec<Vec<T>>> {
            let mm = self.generator(y, s)?;
            let mtb = mat_mul_t(&transpose_t(&mm), b);
            let bm = mat_mul_t(b, &mm);
            Ok(add_scaled(&mtb, &bm, 1.0))
        };
        for k in 0..self.steps {
            let s = dt * k as f64;
            let k1 = rhs(s, &b)?;
            let k2 = rhs(s + dt * 0.5, &axpy(&b, &k1, dt * 0.5))?;
            let k3 = rhs(s + dt * 0.5, &axpy(&b, &k2, dt * 0.5))?;
            let k4 = rhs(s + dt, &axpy(&b, &k3, dt))?;
            for a in 0..m {
                for c in 0..m {
                    b[a][c] = b[a][c] + (k1[a][c] + k2[a][c] * 2.0 + k3[a][c] * 2.0 + k4[a][c]) * (dt * (1.0 / 6.0));
                }
            }
        }
        Ok(b)
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        self.gs.contains(x)
    }
}

fn mat_mul_t<T: Scalar>(a: &[Vec<T>], b: &[Vec<T>]) -> Vec<Vec<T>> {
    let n = a.len();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let mut s = T::from_f64(0.0);
                    for k in 0..n {
                        s = s + a[i][k] * b[k][j];
                    }
                    s
                })
                .collect()
        })
        .collect()
}

fn transpose_t<T: Scalar>(a: &[Vec<T>]) -> Vec<Vec<T>> {
    let n = a.len();
    (0..n).map(|i| (0..n).map(|j| a[j][i]).collect()).collect()
}

fn add_scaled<T: Scalar>(a: &[Vec<T>], b: &[Vec<T>], c: f64) -> Vec<Vec<T>> {
    a.iter()
        .zip(b)
        .map(|(ra, rb)| ra.iter().zip(rb).map(|(x, y)| *x + *y * c).collect())
        .collect()
}

fn axpy<T: Scalar>(a: &[Vec<T>], b: &[Vec<T>], c: T) -> Vec<Vec<T>> {
    a.iter()
        .zip(b)
        .map(|(ra, rb)| ra.iter().zip(rb).map(|(x, y)| *x + *y * c).collect())
        .collect()
}

impl MetricField for DeformedMetric<'_> {
    fn dim(&self) -> usize {
        self.gs.dim()
    }

    fn metric_jet(&self, x: &[f64]) -> Result<MetricJet> {
        if !self.gs.contains(x) {
            return Err(Error::OutsideDomain { point: x.to_vec() });
        }
        self.metric_jet_on_side(x, self.gs.side_of(x))
    }

    fn interface(&self) -> Option<usize> {
        Some(self.gs.dim() - 1)
    }

    fn metric_jet_on_side(&self, x: &[f64], side: usize) -> Result<MetricJet> {
        let g = self.side_metric(side, &Taylor2::seed(x))?;
        let mj = MetricJet::from_taylor(self.gs.dim(), &g);
        check_nondegenerate(&mj.g, self.gs.dim(), x)?;
        Ok(mj)
    }

    fn contains(&self, x: &[f64]) -> bool {
        self.gs.contains(x)
    }
}

/// Builds the deformation of side 0 and checks positivity on a grid of
/// the layer `0 ≤ t ≤ δ`.
pub fn deform(gs: &CollarGluedSpace, profile: SmoothingProfile) -> Result<DeformedMetric<'_>> {
    let depth = gs.depth(0).min(gs.depth(1));
    if profile.delta >= depth {
        return Err(Error::Invalid(format!(
            "δ = {} must be below the collar depth {depth}",
            profile.delta
        )));
    }
    let steps = ((profile.delta / 0.025).ceil() as usize).max(8);
    let mut dm = DeformedMetric {
        gs,
        profile,
        steps,
        flat_interface: false,
    };
    dm.flat_interface = gs.y_grid(PD_Y_RES).iter().all(|y| {
        let b = dm.initial(&Taylor2::seed(y));
        b.is_ok_and(|b| {
            b.iter()
                .flatten()
                .all(|v| v.v == 0.0 && v.g.iter().all(|d| *d == 0.0) && v.h.iter().flatten().all(|d| *d == 0.0))
        })
    });
    let n = gs.dim();
    for y in gs.y_grid(PD_Y_RES) {
        for i in 0..=PD_T_RES {
            let mut x = y.clone();
            x.push(profile.delta * i as f64 / PD_T_RES as f64);
            let g = dm.side_metric(0, &x)?;
            let mut mat = linalg::ZERO;
            for a in 0..n {
                for b in 0..n {
                    mat[a][b] = g[a][b];
                }
            }
            if linalg::cholesky(&mat, n).is_none() {
                return Err(Error::DeformationNotPositive { point: x });
            }
        }
    }
    Ok(dm)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct C1Report {
    /// Largest jump of `∂_t g_ij` across `t = 0` over the Y grid.
    pub max_jump: f64,
    pub argmax: Vec<f64>,
    pub pass: bool,
}

pub const C1_TOL: f64 = 1e-8;

/// Jump of the normal derivative of the deformed metric across Y.
pub fn c1_matching_check(dm: &DeformedMetric<'_>, y_res: usize) -> Result<C1Report> {
    let n = dm.dim();
    let mut best = (f64::NEG_INFINITY, Vec::new());
    for y in dm.gs.y_grid(y_res) {
        let mut x = y.clone();
        x.push(0.0);
        let seed = Taylor2::seed(&x);
        let g0 = dm.side_metric(0, &seed)?;
        let g1 = dm.side_metric(1, &seed)?;
        let mut jump: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                jump = jump.max((g0[i][j].g[n - 1] - g1[i][j].g[n - 1]).abs());
            }
        }
        if jump > best.0 {
            best = (jump, y);
        }
    }
    Ok(C1Report {
        max_jump: best.0,
        argmax: best.1,
        pass: best.0 <= C1_TOL,
    })
}

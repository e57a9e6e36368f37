use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::geom_core::chart::{check_nondegenerate, MetricField, MetricJet, ScalarSource};
use crate::geom_core::scalar::Taylor2;
use crate::gluing::deform::DeformedMetric;
use crate::gluing::space::CollarGluedSpace;
use crate::numerics::{gl32, integrate, smoothstep};

/// Gauss–Legendre panels per kernel piece; the kernel's flat ends need
/// several to reach ~1e−12 mass error.
const PANELS: usize = 4;

/// Jumps below this leave a component unmollified.
pub const JUMP_FLOOR: f64 = 1e-12;

/// Normalizing constant of `exp(−1/(1−z²))` on (−1, 1).
fn kernel_scale() -> f64 {
    static C: OnceLock<f64> = OnceLock::new();
    *C.get_or_init(|| 1.0 / integrate(bump, -1.0, 1.0, 64, gl32()))
}

fn bump(z: f64) -> f64 {
    if z.abs() >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - z * z)).exp()
    }
}

/// Unit-mass kernel ρ on [−1, 1].
pub fn kernel(z: f64) -> f64 {
    kernel_scale() * bump(z)
}

pub fn kernel_derivative(z: f64) -> f64 {
    if z.abs() >= 1.0 {
        return 0.0;
    }
    let q = 1.0 - z * z;
    kernel(z) * (-2.0 * z / (q * q))
}

/// Convolution in `t` of a piecewise jet field with `ρ_h`, with the
/// derivative contributions of the jump at `t = 0` added explicitly.
/// `eval(side, x)` returns the components of one side at `x`.
fn convolve<F>(x: &[f64], h: f64, eval: &F) -> Result<Vec<Taylor2>>
where
    F: Fn(usize, &[f64]) -> Result<Vec<Taylor2>>,
{
    let n = x.len();
    let k = n - 1;
    let t = x[k];
    let zs = t / h;
    let rule = gl32();
    let mut acc: Option<Vec<Taylor2>> = None;
    let mut mass = 0.0;
    let mut piece = |side: usize, a: f64, b: f64| -> Result<()> {
        let half = 0.5 * (b - a) / PANELS as f64;
        let nodes = (0..PANELS).flat_map(|p| {
            let lo = a + 2.0 * half * p as f64;
            rule.0.iter().zip(&rule.1).map(move |(x, w)| (lo + half * (x + 1.0), *w))
        });
        for (z, w) in nodes {
            let wr = w * half * kernel(z);
            if wr == 0.0 {
                continue;
            }
            let mut p = x.to_vec();
            p[k] = t - h * z;
            let v = eval(side, &p)?;
            mass += wr;
            match &mut acc {
                None => acc = Some(v.into_iter().map(|c| c * wr).collect()),
                Some(s) => {
                    for (si, c) in s.iter_mut().zip(v) {
                        *si = *si + c * wr;
                    }
                }
            }
        }
        Ok(())
    };
    if zs >= 1.0 {
        piece(0, -1.0, 1.0)?;
    } else if zs <= -1.0 {
        piece(1, -1.0, 1.0)?;
    } else {
        // z < z* maps to s > 0
        piece(0, -1.0, zs)?;
        piece(1, zs, 1.0)?;
    }
    let mut out: Vec<Taylor2> = acc
        .ok_or_else(|| Error::Quadrature { estimate: 0.0 })?
        .into_iter()
        .map(|c| c * (1.0 / mass))
        .collect();
    if zs.abs() < 1.0 {
        let mut y0 = x.to_vec();
        y0[k] = 0.0;
        let j0 = eval(0, &y0)?;
        let j1 = eval(1, &y0)?;
        let rh = kernel(zs) / h;
        let rhp = kernel_derivative(zs) / (h * h);
        for (o, (a, b)) in out.iter_mut().zip(j0.iter().zip(&j1)) {
            let j = *a - *b;
            o.g[k] += j.v * rh;
            o.h[k][k] += j.g[k] * rh + j.v * rhp;
            for i in 0..k {
                o.h[i][k] += j.g[i] * rh;
                o.h[k][i] += j.g[i] * rh;
            }
        }
    }
    Ok(out)
}

/// Cutoff that is 1 for `|t| ≤ 2h` and 0 for `|t| ≥ 2h + δ/2`.
fn blend(t: Taylor2, h: f64, delta: f64) -> Taylor2 {
    let at = if t.v >= 0.0 { t } else { -t };
    smoothstep((at - 2.0 * h) * (2.0 / delta))
}

/// `raw + χ (conv − raw)`, skipping the convolution where χ vanishes.
fn blended<F>(x: &[f64], h: f64, delta: f64, side: usize, eval: &F) -> Result<Vec<Taylor2>>
where
    F: Fn(usize, &[f64]) -> Result<Vec<Taylor2>>,
{
    let n = x.len();
    let t = Taylor2::variable(x[n - 1], n - 1, n);
    let chi = blend(t, h, delta);
    if chi.v == 0.0 {
        return eval(side, x);
    }
    let conv = convolve(x, h, eval)?;
    if x[n - 1].abs() <= 2.0 * h {
        return Ok(conv);
    }
    let raw = eval(side, x)?;
    Ok(raw.iter().zip(&conv).map(|(r, c)| *r + chi * (*c - *r)).collect())
}

/// The deformed metric convolved across the interface and blended back
/// to it away from `t = 0`; equal to the glued metric for `|t| > δ + h`.
#[derive(Clone, Copy, Debug)]
pub struct SmoothedMetric<'a> {
    pub deformed: DeformedMetric<'a>,
}

impl<'a> SmoothedMetric<'a> {
    pub fn h(&self) -> f64 {
        self.deformed.profile.h
    }

    pub fn delta(&self) -> f64 {
        self.deformed.profile.delta
    }

    pub fn gs(&self) -> &'a CollarGluedSpace {
        self.deformed.gs
    }

    fn components(&self, side: usize, x: &[f64]) -> Result<Vec<Taylor2>> {
        Ok(self.deformed.side_metric(side, &Taylor2::seed(x))?.concat())
    }

    /// Metric jet components, row-major.
    pub fn jet_components(&self, x: &[f64]) -> Result<Vec<Taylor2>> {
        let side = self.gs().side_of(x);
        blended(x, self.h(), self.delta(), side, &|s, p: &[f64]| self.components(s, p))
    }

    /// The smoothed weight over the same gluing.
    pub fn weight(&self) -> SmoothedWeight<'a> {
        SmoothedWeight {
            gs: self.gs(),
            h: self.h(),
            delta: self.delta(),
        }
    }
}

/// Checks the width precondition and wraps the deformation.
pub fn mollify(deformed: DeformedMetric<'_>) -> Result<SmoothedMetric<'_>> {
    deformed.profile.validate()?;
    Ok(SmoothedMetric { deformed })
}

impl MetricField for SmoothedMetric<'_> {
    fn dim(&self) -> usize {
        self.deformed.dim()
    }

    fn metric_jet(&self, x: &[f64]) -> Result<MetricJet> {
        if !self.gs().contains(x) {
            return Err(Error::OutsideDomain { point: x.to_vec() });
        }
        let n = self.dim();
        let c = self.jet_components(x)?;
        let rows: Vec<Vec<Taylor2>> = c.chunks(n).map(|r| r.to_vec()).collect();
        let mut mj = MetricJet::from_taylor(n, &rows);
        // symmetrize rounding from the separate accumulations
        for i in 0..n {
            for j in i + 1..n {
                let v = 0.5 * (mj.g[i][j] + mj.g[j][i]);
                mj.g[i][j] = v;
                mj.g[j][i] = v;
            }
        }
        check_nondegenerate(&mj.g, n, x)?;
        Ok(mj)
    }

    fn contains(&self, x: &[f64]) -> bool {
        self.gs().contains(x)
    }
}

/// The glued weight, convolved across `t = 0` where it jumps.
#[derive(Clone, Copy, Debug)]
pub struct SmoothedWeight<'a> {
    pub gs: &'a CollarGluedSpace,
    pub h: f64,
    pub delta: f64,
}

impl SmoothedWeight<'_> {
    fn side(&self, side: usize, x: &[f64]) -> Result<Vec<Taylor2>> {
        Ok(vec![self.gs.side_weight(side, &Taylor2::seed(x))?])
    }

    fn has_jump(&self, x: &[f64]) -> Result<bool> {
        let mut y0 = x.to_vec();
        let n = x.len();
        y0[n - 1] = 0.0;
        let j = self.side(0, &y0)?[0] - self.side(1, &y0)?[0];
        Ok(j.v.abs() > JUMP_FLOOR || j.g[..n].iter().any(|d| d.abs() > JUMP_FLOOR))
    }
}

impl ScalarSource for SmoothedWeight<'_> {
    fn scalar_jet(&self, x: &[f64]) -> Result<Taylor2> {
        let side = self.gs.side_of(x);
        if !self.has_jump(x)? {
            return Ok(self.side(side, x)?[0]);
        }
        let f = |s: usize, p: &[f64]| self.side(s, p);
        Ok(blended(x, self.h, self.delta, side, &f)?[0])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kernel_has_unit_mass() {
        let m = integrate(kernel, -1.0, 1.0, 256, gl32());
        assert!((m - 1.0).abs() < 1e-13);
        let m1 = integrate(kernel, -1.0, 0.3, PANELS, gl32()) + integrate(kernel, 0.3, 1.0, PANELS, gl32());
        assert!((m1 - 1.0).abs() < 1e-12, "{m1}");
    }

    #[test]
    fn convolution_of_kink_has_jump_derivative() {
        // |t| mollified: value at 0 is h ∫|z|ρ, slope ρ-weighted sign mass
        let h = 1e-3;
        let eval = |side: usize, p: &[f64]| -> Result<Vec<Taylor2>> {
            let t = Taylor2::seed(p)[0];
            Ok(vec![if side == 0 { t } else { -t }])
        };
        let c = convolve(&[0.0], h, &eval).unwrap()[0];
        let expect = h * 2.0 * integrate(|z| z * kernel(z), 0.0, 1.0, 64, gl32());
        assert!((c.v - expect).abs() < 1e-12);
        assert!(c.g[0].abs() < 1e-12);
        assert!((c.h[0][0] - 2.0 * kernel(0.0) / h).abs() < 1e-6 * kernel(0.0) / h);
        let c = convolve(&[0.4 * h], h, &eval).unwrap()[0];
        let slope = integrate(kernel, -1.0, 0.4, 64, gl32()) - integrate(kernel, 0.4, 1.0, 64, gl32());
        assert!((c.g[0] - slope).abs() < 1e-8);
    }
}

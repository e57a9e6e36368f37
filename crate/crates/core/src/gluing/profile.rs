use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom_core::scalar::{Scalar, Taylor3};
use crate::numerics::{gl32, smoothstep};

/// Shape of the curvature-compensation profile 𝓕_δ.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CalFProfile {
    /// `(∫₀^t A) · B(t)`: second derivative `η(t/δ⁴)` near 0, `O(δ³)` later.
    #[default]
    DoubleIntegral,
    /// `t² η(t/δ)`.
    Quadratic,
}

/// Parameters of the δ-family. `F_δ = s·A·B` with `A(t) = ∫₀^t η(u/δ⁴) du`
/// and `B(t) = η((t − 2δ⁴)/(δ − 2δ⁴))`, so `F(0) = 0`, `F'(0) = s` and
/// `F ≡ 0` for `t ≥ δ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SmoothingProfile {
    pub delta: f64,
    /// Coefficient of the 𝓕 term; 0 disables it.
    pub c: f64,
    /// Mollifier half-width.
    pub h: f64,
    /// Sign of F'(0); 1 for the matching deformation.
    pub f_scale: f64,
    pub cal: CalFProfile,
}

impl SmoothingProfile {
    pub fn new(delta: f64) -> Result<Self> {
        if !(delta > 0.0 && delta <= 0.5) {
            return Err(Error::Invalid(format!("δ = {delta} outside (0, 0.5]")));
        }
        Ok(SmoothingProfile {
            delta,
            c: 1.0,
            h: delta.powi(5),
            f_scale: 1.0,
            cal: CalFProfile::DoubleIntegral,
        })
    }

    /// Rejects mollifier widths that reach the region where F'' is large.
    pub fn validate(&self) -> Result<()> {
        let limit = 0.5 * self.delta.powi(4);
        if !(self.h > 0.0) || self.h >= limit {
            return Err(Error::WidthTooLarge { h: self.h, limit });
        }
        Ok(())
    }

    fn d4(&self) -> f64 {
        self.delta.powi(4)
    }

    /// Cutoff `B`.
    pub fn cutoff<T: Scalar>(&self, t: T) -> T {
        let a = 2.0 * self.d4();
        smoothstep((t - a) * (1.0 / (self.delta - a)))
    }

    /// `A(t) = δ⁴ I(t/δ⁴)`.
    pub fn ramp<T: Scalar>(&self, t: T) -> T {
        let d4 = self.d4();
        let u = t * (1.0 / d4);
        let (i0, _) = eta_integrals(u.value());
        let e = eta3(u.value());
        u.chain([i0, e[0], e[1], e[2]]) * d4
    }

    pub fn f<T: Scalar>(&self, t: T) -> T {
        if t.value() >= self.delta || self.f_scale == 0.0 {
            return T::from_f64(0.0);
        }
        self.ramp(t) * self.cutoff(t) * self.f_scale
    }

    pub fn cal_f<T: Scalar>(&self, t: T) -> T {
        if t.value() >= self.delta {
            return T::from_f64(0.0);
        }
        match self.cal {
            CalFProfile::DoubleIntegral => {
                let d4 = self.d4();
                let u = t * (1.0 / d4);
                let (i0, k0) = eta_integrals(u.value());
                let e = eta3(u.value());
                u.chain([k0, i0, e[0], e[1]]) * (d4 * d4) * self.cutoff(t)
            }
            CalFProfile::Quadratic => t * t * smoothstep(t * (1.0 / self.delta)),
        }
    }
}

/// `η, η', η''` at `u`.
fn eta3(u: f64) -> [f64; 3] {
    let s = smoothstep(Taylor3::variable(u, 0, 1));
    [s.v, s.g[0], s.h[0][0]]
}

/// `I(u) = ∫₀^u η` and `K(u) = ∫₀^u I`.
pub fn eta_integrals(u: f64) -> (f64, f64) {
    if u <= 0.0 {
        return (u, 0.5 * u * u);
    }
    let (i1, k1) = unit_integrals();
    if u >= 1.0 {
        return (i1, k1 + i1 * (u - 1.0));
    }
    let (i, m) = eta_moments(u);
    // ∫₀^u I = u I(u) − ∫₀^u s η(s) ds
    (i, u * i - m)
}

fn eta_moments(u: f64) -> (f64, f64) {
    let rule = gl32();
    let panels = 8;
    let w = u / panels as f64;
    let (mut i, mut m) = (0.0, 0.0);
    for p in 0..panels {
        let lo = w * p as f64;
        for (x, wt) in rule.0.iter().zip(&rule.1) {
            let s = lo + 0.5 * w * (x + 1.0);
            let e = smoothstep(s);
            i += 0.5 * w * wt * e;
            m += 0.5 * w * wt * s * e;
        }
    }
    (i, m)
}

fn unit_integrals() -> (f64, f64) {
    static CELL: std::sync::OnceLock<(f64, f64)> = std::sync::OnceLock::new();
    *CELL.get_or_init(|| {
        let (i, m) = eta_moments(1.0);
        (i, i - m)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom_core::scalar::Taylor2;

    #[test]
    fn unit_integral_is_half() {
        let (i, k) = eta_integrals(1.0);
        assert!((i - 0.5).abs() < 1e-14);
        // independent trapezoid for ∫₀¹ (1 − s) η(s) ds
        let m = 200_000;
        let mut trap = 0.0;
        for j in 0..=m {
            let s = j as f64 / m as f64;
            let w = if j == 0 || j == m { 0.5 } else { 1.0 };
            trap += w * (1.0 - s) * smoothstep(s);
        }
        trap /= m as f64;
        assert!((k - trap).abs() < 1e-9, "{k} vs {trap}");
    }

    #[test]
    fn f_matches_boundary_values() {
        let p = SmoothingProfile::new(0.2).unwrap();
        let t = Taylor2::variable(0.0, 0, 1);
        let f = p.f(t);
        assert_eq!(f.v, 0.0);
        assert!((f.g[0] - 1.0).abs() < 1e-14);
        assert!(f.h[0][0].abs() < 1e-12);
        let c = p.cal_f(t);
        assert_eq!(c.v, 0.0);
        assert_eq!(c.g[0], 0.0);
        assert!((c.h[0][0] - 1.0).abs() < 1e-14);
        assert_eq!(p.f(0.2), 0.0);
        assert_eq!(p.cal_f(0.25), 0.0);
    }

    #[test]
    fn ramp_derivative_is_eta() {
        let p = SmoothingProfile::new(0.3).unwrap();
        let d4 = 0.3f64.powi(4);
        for &t in &[0.1 * d4, 0.5 * d4, 0.9 * d4, 1.5 * d4] {
            let a = p.ramp(Taylor2::variable(t, 0, 1));
            assert!((a.g[0] - smoothstep(t / d4)).abs() < 1e-13);
            let fd = (p.ramp(t + 1e-9 * d4) - p.ramp(t - 1e-9 * d4)) / (2e-9 * d4);
            assert!((fd - a.g[0]).abs() < 1e-6);
        }
    }

    #[test]
    fn width_precondition() {
        let mut p = SmoothingProfile::new(0.1).unwrap();
        assert!(p.validate().is_ok());
        p.h = 0.6e-4;
        assert!(matches!(p.validate(), Err(Error::WidthTooLarge { .. })));
    }
}

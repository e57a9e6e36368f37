use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::needle::concavity::{kn_check_fn, KnReport, KN_TOL};
use crate::numerics::one_sided_derivative;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Analytic,
    Disintegration,
    User,
}

pub type SideFn = Arc<dyn Fn(f64) -> Result<f64> + Send + Sync>;

/// A needle density on `(a, b)`, `a < 0 < b`, smooth on each side of 0.
#[derive(Clone)]
pub struct NeedleDensity {
    pub a: f64,
    pub b: f64,
    /// Evaluates `h` for `t ≤ 0`.
    pub left: SideFn,
    /// Evaluates `h` for `t ≥ 0`.
    pub right: SideFn,
    pub provenance: Provenance,
}

impl fmt::Debug for NeedleDensity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("NeedleDensity")
            .field("a", &self.a)
            .field("b", &self.b)
            .field("provenance", &self.provenance)
            .finish()
    }
}

impl NeedleDensity {
    pub fn new(a: f64, b: f64, left: SideFn, right: SideFn, provenance: Provenance) -> Result<Self> {
        if !(a < 0.0 && b > 0.0) {
            return Err(Error::Invalid(format!("needle interval ({a}, {b}) must contain 0")));
        }
        let nd = NeedleDensity {
            a,
            b,
            left,
            right,
            provenance,
        };
        let (l, r) = ((nd.left)(0.0)?, (nd.right)(0.0)?);
        if (l - r).abs() > 1e-8 * (1.0 + l.abs()) {
            return Err(Error::Invalid(format!("needle density jumps at 0: {l} vs {r}")));
        }
        Ok(nd)
    }

    pub fn eval(&self, t: f64) -> Result<f64> {
        if t < 0.0 {
            (self.left)(t)
        } else {
            (self.right)(t)
        }
    }

    /// Base step of the one-sided difference estimates.
    pub fn step(&self) -> f64 {
        1e-3 * (self.b - self.a)
    }

    /// `d⁺h(0)`.
    pub fn d_plus(&self) -> Result<f64> {
        one_sided_derivative(|t| (self.right)(t), 0.0, 1.0, self.step())
    }

    /// `d⁻h(0)`, the derivative from the left.
    pub fn d_minus(&self) -> Result<f64> {
        one_sided_derivative(|t| (self.left)(t), 0.0, -1.0, self.step())
    }

    /// One-sided derivatives of `log h` at 0, `(d⁻, d⁺)`.
    pub fn log_derivatives(&self) -> Result<(f64, f64)> {
        let h0 = (self.right)(0.0)?;
        if h0 <= 0.0 {
            return Err(Error::EvalDomain(format!("needle density {h0} not positive at 0")));
        }
        Ok((self.d_minus()? / h0, self.d_plus()? / h0))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NeedleJumpReport {
    pub left: KnReport,
    pub right: KnReport,
    /// `d⁻(h^{1/(N−1)})(0)`.
    pub d_minus: f64,
    /// `d⁺(h^{1/(N−1)})(0)`.
    pub d_plus: f64,
    pub jump_pass: bool,
    pub pass: bool,
}

/// Per-side (K,N)-concavity of `h` and the concave-kink condition at 0.
pub fn needle_jump_check(nd: &NeedleDensity, k: f64, n: f64, samples: usize, seed: u64) -> Result<NeedleJumpReport> {
    if !(n > 1.0) {
        return Err(Error::Invalid(format!("needle check needs N > 1, got {n}")));
    }
    let left = kn_check_fn(|t| (nd.left)(t), nd.a, 0.0, k, n, samples, seed)?;
    let right = kn_check_fn(|t| (nd.right)(t), 0.0, nd.b, k, n, samples, seed)?;
    let h0 = (nd.right)(0.0)?;
    if h0 <= 0.0 {
        return Err(Error::EvalDomain(format!("needle density {h0} not positive at 0")));
    }
    // d(h^p) = p h^{p−1} dh
    let p = 1.0 / (n - 1.0);
    let scale = p * h0.powf(p - 1.0);
    let d_minus = scale * nd.d_minus()?;
    let d_plus = scale * nd.d_plus()?;
    let jump_pass = d_minus >= d_plus - KN_TOL;
    Ok(NeedleJumpReport {
        pass: left.pass && right.pass && jump_pass,
        left,
        right,
        d_minus,
        d_plus,
        jump_pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn needle(left: fn(f64) -> f64, right: fn(f64) -> f64, a: f64, b: f64) -> NeedleDensity {
        NeedleDensity::new(
            a,
            b,
            Arc::new(move |t| Ok(left(t))),
            Arc::new(move |t| Ok(right(t))),
            Provenance::Analytic,
        )
        .unwrap()
    }

    #[test]
    fn affine_needles() {
        let tent = needle(|t| 1.0 + t, |t| 1.0 - t, -0.5, 0.5);
        let r = needle_jump_check(&tent, 0.0, 2.0, 500, 0).unwrap();
        assert!(r.pass);
        assert!((r.d_minus - 1.0).abs() < 1e-9 && (r.d_plus + 1.0).abs() < 1e-9);
        let valley = needle(|t| 1.0 - t, |t| 1.0 + t, -0.5, 0.5);
        let r = needle_jump_check(&valley, 0.0, 2.0, 500, 0).unwrap();
        assert!(!r.pass && !r.jump_pass);
    }

    #[test]
    fn cosine_needle_passes() {
        let c = needle(f64::cos, f64::cos, -1.0, 1.0);
        let r = needle_jump_check(&c, 1.0, 2.0, 2000, 0).unwrap();
        assert!(r.pass, "{r:?}");
        assert!((r.d_minus - r.d_plus).abs() < 1e-9);
    }
}

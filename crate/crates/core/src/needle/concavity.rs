use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geom_core::chart::ScalarField;
use crate::geom_core::scalar::{Scalar, Taylor2};
use crate::needle::distortion::sigma;
use crate::numerics::{integrate, kronecker, gl8};

pub const KN_TOL: f64 = 1e-9;
pub const DEFAULT_SAMPLES: usize = 4096;

/// A density on an interval, smooth or glued from two smooth pieces.
#[derive(Clone, Debug)]
pub enum Density1d {
    Field(ScalarField),
    /// `left` on `x < at`, `right` on `x ≥ at`.
    Piecewise {
        at: f64,
        left: ScalarField,
        right: ScalarField,
    },
}

impl Density1d {
    pub fn value(&self, x: f64) -> Result<f64> {
        match self {
            Density1d::Field(f) => f.value(&[x]),
            Density1d::Piecewise { at, left, right } => {
                if x < *at {
                    left.value(&[x])
                } else {
                    right.value(&[x])
                }
            }
        }
    }

    /// The smooth piece governing `x` from the given side (−1 left, +1 right).
    pub fn piece(&self, x: f64, dir: f64) -> &ScalarField {
        match self {
            Density1d::Field(f) => f,
            Density1d::Piecewise { at, left, right } => {
                if x < *at || (x == *at && dir < 0.0) {
                    left
                } else {
                    right
                }
            }
        }
    }
}

/// An interval `[a, b]` with measure `Φ dx`, curvature bound K and
/// dimension bound N.
#[derive(Clone, Debug)]
pub struct MmInterval {
    pub a: f64,
    pub b: f64,
    pub density: Density1d,
    pub k: f64,
    pub n: f64,
}

impl MmInterval {
    pub fn new(a: f64, b: f64, density: Density1d, k: f64, n: f64) -> Result<Self> {
        if !(a < b) {
            return Err(Error::Invalid(format!("empty interval [{a}, {b}]")));
        }
        if !(n >= 1.0) {
            return Err(Error::Invalid(format!("N = {n} must be at least 1")));
        }
        let mut neg = None;
        let mass = integrate(
            |x| {
                let v = density.value(x).unwrap_or(f64::NAN);
                if !(v >= 0.0) {
                    neg.get_or_insert(x);
                }
                v
            },
            a,
            b,
            64,
            gl8(),
        );
        if let Some(x) = neg {
            return Err(Error::Invalid(format!("density negative or undefined at {x}")));
        }
        if !(mass > 0.0) {
            return Err(Error::Invalid("density has zero mass".into()));
        }
        Ok(MmInterval { a, b, density, k, n })
    }

    pub fn smooth(a: f64, b: f64, phi: ScalarField, k: f64, n: f64) -> Result<Self> {
        Self::new(a, b, Density1d::Field(phi), k, n)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KnReport {
    /// Max of RHS − LHS over the sampled triples.
    pub max_violation: f64,
    /// `(x₀, x₁, t)` attaining it.
    pub witness: [f64; 3],
    pub samples: usize,
    pub pass: bool,
}

/// `(K,N)`-concavity of `u = Φ^{1/(N−1)}` on `[a, b]`, tested on `samples`
/// low-discrepancy triples:
/// `u(x_t) ≥ σ^{(1−t)}_κ(|x₁−x₀|) u(x₀) + σ^{(t)}_κ(|x₁−x₀|) u(x₁)`.
pub fn kn_check_fn<F>(phi: F, a: f64, b: f64, k: f64, n: f64, samples: usize, seed: u64) -> Result<KnReport>
where
    F: Fn(f64) -> Result<f64> + Sync,
{
    if !(n > 1.0) {
        return Err(Error::Invalid(format!("concavity needs N > 1, got {n}")));
    }
    if samples == 0 {
        return Err(Error::Invalid("no samples".into()));
    }
    let u = |x: f64| -> Result<f64> {
        let v = phi(x)?;
        if v < 0.0 {
            return Err(Error::EvalDomain(format!("density {v} negative at {x}")));
        }
        Ok(v.powf(1.0 / (n - 1.0)))
    };
    let vals: Vec<Result<(f64, [f64; 3])>> = (0..samples as u64)
        .into_par_iter()
        .map(|i| {
            let q = kronecker(i, 3, seed);
            let x0 = a + (b - a) * q[0];
            let x1 = a + (b - a) * q[1];
            let t = q[2];
            let theta = (x1 - x0).abs();
            let xt = (1.0 - t) * x0 + t * x1;
            let (u0, u1, ut) = (u(x0)?, u(x1)?, u(xt)?);
            let term = |s: f64, w: f64| if w == 0.0 { 0.0 } else { s * w };
            let rhs = term(sigma(k, n - 1.0, 1.0 - t, theta), u0) + term(sigma(k, n - 1.0, t, theta), u1);
            Ok((rhs - ut, [x0, x1, t]))
        })
        .collect();
    let mut best = (f64::NEG_INFINITY, [0.0; 3]);
    for v in vals {
        let (d, w) = v?;
        if d > best.0 {
            best = (d, w);
        }
    }
    Ok(KnReport {
        max_violation: best.0,
        witness: best.1,
        samples,
        pass: best.0 <= KN_TOL,
    })
}

pub fn kn_concavity_check(mm: &MmInterval, samples: usize, seed: u64) -> Result<KnReport> {
    kn_check_fn(|x| mm.density.value(x), mm.a, mm.b, mm.k, mm.n, samples, seed)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Glue1dReport {
    pub left: KnReport,
    pub right: KnReport,
    /// Left derivative of `Φ^{1/(N−1)}` at the gluing point.
    pub d_minus: f64,
    /// Right derivative.
    pub d_plus: f64,
    pub kink_pass: bool,
    pub pass: bool,
}

/// `d/dx Φ^{1/(N−1)}` at `x` from a jet.
fn u_slope(phi: &ScalarField, x: f64, n: f64) -> Result<f64> {
    let j = phi.eval(&[Taylor2::variable(x, 0, 1)])?;
    if j.v <= 0.0 {
        return Err(Error::EvalDomain(format!("density {} not positive at {x}", j.v)));
    }
    Ok(j.powf(1.0 / (n - 1.0)).g[0])
}

/// Glues `Φ₀` on `[a, b]` to `Φ₁` on `[b, c]`: each side must be
/// (K,N)-concave and the kink at `b` concave,
/// `d⁻(Φ^{1/(N−1)})(b) ≥ d⁺(Φ^{1/(N−1)})(b)`.
#[allow(clippy::too_many_arguments)]
pub fn glue_1d(
    phi0: &ScalarField,
    phi1: &ScalarField,
    a: f64,
    b: f64,
    c: f64,
    k: f64,
    n: f64,
    samples: usize,
    seed: u64,
) -> Result<Glue1dReport> {
    if !(a < b && b < c) {
        return Err(Error::Invalid(format!("need a < b < c, got {a}, {b}, {c}")));
    }
    let (v0, v1) = (phi0.value(&[b])?, phi1.value(&[b])?);
    if (v0 - v1).abs() > 1e-9 || v0 <= 0.0 {
        return Err(Error::InterfaceMismatch(format!(
            "densities at the gluing point are {v0} and {v1}"
        )));
    }
    let left = kn_check_fn(|x| phi0.value(&[x]), a, b, k, n, samples, seed)?;
    let right = kn_check_fn(|x| phi1.value(&[x]), b, c, k, n, samples, seed)?;
    let d_minus = u_slope(phi0, b, n)?;
    let d_plus = u_slope(phi1, b, n)?;
    let kink_pass = d_minus >= d_plus - KN_TOL;
    Ok(Glue1dReport {
        pass: left.pass && right.pass && kink_pass,
        left,
        right,
        d_minus,
        d_plus,
        kink_pass,
    })
}

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geom_core::chart::ScalarField;
use crate::needle::concavity::MmInterval;
use crate::needle::distortion::tau;
use crate::numerics::gl8;

pub const CD_TOL: f64 = 1e-6;
const PANELS: usize = 256;
const QUANTILE_TOL: f64 = 1e-10;

/// A probability measure `ρ·m` on `[lo, hi]`, `ρ` given up to a constant.
#[derive(Clone, Debug)]
pub struct Measure1d {
    pub lo: f64,
    pub hi: f64,
    /// Density with respect to the reference measure, in `x1`.
    pub density: ScalarField,
}

impl Measure1d {
    pub fn new(lo: f64, hi: f64, density: ScalarField) -> Self {
        Measure1d { lo, hi, density }
    }

    /// Uniform with respect to the reference measure.
    pub fn block(lo: f64, hi: f64) -> Self {
        Measure1d::new(lo, hi, ScalarField::constant(1.0, 1))
    }
}

/// Quantile samples of a measure at the fixed `u`-quadrature nodes.
struct Quantiles {
    /// `Q(u)`
    q: Vec<f64>,
    /// Lebesgue density `dμ/dx` at `Q(u)`.
    f: Vec<f64>,
    /// Normalized density `dμ/dm` at `Q(u)`.
    rho: Vec<f64>,
}

/// Composite GL8 nodes and weights on `(0, 1)`.
fn u_nodes() -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gl8();
    let h = 1.0 / PANELS as f64;
    let mut nodes = Vec::with_capacity(PANELS * x.len());
    let mut weights = Vec::with_capacity(PANELS * x.len());
    for p in 0..PANELS {
        let c = (p as f64 + 0.5) * h;
        for (xi, wi) in x.iter().zip(w) {
            nodes.push(c + 0.5 * h * xi);
            weights.push(0.5 * h * wi);
        }
    }
    (nodes, weights)
}

fn gl8_on<F: Fn(f64) -> Result<f64>>(f: &F, a: f64, b: f64) -> Result<f64> {
    let (x, w) = gl8();
    let (c, r) = (0.5 * (a + b), 0.5 * (b - a));
    let mut s = 0.0;
    for (xi, wi) in x.iter().zip(w) {
        s += wi * f(c + r * xi)?;
    }
    Ok(r * s)
}

fn quantiles(mm: &MmInterval, mu: &Measure1d, us: &[f64]) -> Result<Quantiles> {
    if !(mm.a < mu.lo && mu.lo < mu.hi && mu.hi < mm.b) {
        return Err(Error::Invalid(format!(
            "support [{}, {}] must lie strictly inside ({}, {})",
            mu.lo, mu.hi, mm.a, mm.b
        )));
    }
    let lebesgue = |x: f64| -> Result<f64> {
        let v = mu.density.value(&[x])? * mm.density.value(x)?;
        if !(v > 0.0) {
            return Err(Error::Invalid(format!("measure density {v} not positive at {x}")));
        }
        Ok(v)
    };
    let h = (mu.hi - mu.lo) / PANELS as f64;
    let mut cum = vec![0.0; PANELS + 1];
    for p in 0..PANELS {
        let a = mu.lo + h * p as f64;
        cum[p + 1] = cum[p] + gl8_on(&lebesgue, a, a + h)?;
    }
    let mass = cum[PANELS];
    if !(mass.is_finite() && mass > 0.0) {
        return Err(Error::Invalid(format!("measure is not normalizable (mass {mass})")));
    }
    let mut out = Quantiles {
        q: Vec::with_capacity(us.len()),
        f: Vec::with_capacity(us.len()),
        rho: Vec::with_capacity(us.len()),
    };
    for &u in us {
        let target = u * mass;
        let p = cum.partition_point(|&c| c <= target).clamp(1, PANELS) - 1;
        let (mut lo, mut hi) = (mu.lo + h * p as f64, mu.lo + h * (p + 1) as f64);
        let (start, base) = (lo, cum[p]);
        let mut x = lo + (hi - lo) * ((target - base) / (cum[p + 1] - base)).clamp(0.0, 1.0);
        // safeguarded Newton on F(x) − u
        for _ in 0..100 {
            let r = (base + gl8_on(&lebesgue, start, x)? - target) / mass;
            if r.abs() <= QUANTILE_TOL * 1e-2 {
                break;
            }
            if r > 0.0 {
                hi = x;
            } else {
                lo = x;
            }
            let step = r * mass / lebesgue(x)?;
            let nx = x - step;
            x = if nx > lo && nx < hi { nx } else { 0.5 * (lo + hi) };
            if hi - lo <= QUANTILE_TOL * (mu.hi - mu.lo) {
                break;
            }
        }
        let f = lebesgue(x)? / mass;
        out.q.push(x);
        out.f.push(f);
        out.rho.push(f / mm.density.value(x)?);
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CdSample {
    pub t: f64,
    /// `S_N(μ_t)`.
    pub entropy: f64,
    /// The distortion-weighted bound.
    pub bound: f64,
    pub violation: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WassersteinReport {
    pub samples: Vec<CdSample>,
    pub max_violation: f64,
    /// Time of the worst sample.
    pub witness_t: f64,
    pub w2: f64,
    pub pass: bool,
}

fn cd_samples(mm: &MmInterval, q0: &Quantiles, q1: &Quantiles, w: &[f64], times: &[f64]) -> Result<Vec<CdSample>> {
    let n = mm.n;
    times
        .par_iter()
        .map(|&t| {
            let mut entropy = 0.0;
            let mut bound = 0.0;
            for i in 0..w.len() {
                let (x0, x1) = (q0.q[i], q1.q[i]);
                let xt = (1.0 - t) * x0 + t * x1;
                // dx_t/du = (1−t)/f₀ + t/f₁
                let jac = (1.0 - t) / q0.f[i] + t / q1.f[i];
                let rho_t = 1.0 / (jac * mm.density.value(xt)?);
                entropy -= w[i] * rho_t.powf(-1.0 / n);
                let theta = (x1 - x0).abs();
                let a = tau(mm.k, n, 1.0 - t, theta) * q0.rho[i].powf(-1.0 / n);
                let b = tau(mm.k, n, t, theta) * q1.rho[i].powf(-1.0 / n);
                bound -= w[i] * (a + b);
            }
            Ok(CdSample {
                t,
                entropy,
                bound,
                violation: entropy - bound,
            })
        })
        .collect()
}

/// Entropy inequality along the displacement interpolation from `μ₀` to `μ₁`
/// at the given times.
pub fn wasserstein_1d_cd_check(mm: &MmInterval, mu0: &Measure1d, mu1: &Measure1d, times: &[f64]) -> Result<WassersteinReport> {
    if times.is_empty() || times.iter().any(|t| !(0.0..=1.0).contains(t)) {
        return Err(Error::Invalid("time samples must be nonempty and lie in [0, 1]".into()));
    }
    let (us, w) = u_nodes();
    let q0 = quantiles(mm, mu0, &us)?;
    let q1 = quantiles(mm, mu1, &us)?;
    let samples = cd_samples(mm, &q0, &q1, &w, times)?;
    let (mut max_violation, mut witness_t) = (f64::NEG_INFINITY, 0.0);
    for s in &samples {
        if s.violation > max_violation {
            max_violation = s.violation;
            witness_t = s.t;
        }
    }
    let w2 = w2_from(&q0, &q1, &w);
    Ok(WassersteinReport {
        samples,
        max_violation,
        witness_t,
        w2,
        pass: max_violation <= CD_TOL,
    })
}

fn w2_from(q0: &Quantiles, q1: &Quantiles, w: &[f64]) -> f64 {
    let s: f64 = (0..w.len()).map(|i| w[i] * (q0.q[i] - q1.q[i]).powi(2)).sum();
    s.sqrt()
}

/// `W₂(μ₀, μ₁)` from the quantile coupling.
pub fn w2(mm: &MmInterval, mu0: &Measure1d, mu1: &Measure1d) -> Result<f64> {
    let (us, w) = u_nodes();
    Ok(w2_from(&quantiles(mm, mu0, &us)?, &quantiles(mm, mu1, &us)?, &w))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BlockScanReport {
    pub max_violation: f64,
    /// `(lo₀, hi₀, lo₁, hi₁, t)` of the worst pair.
    pub witness: [f64; 5],
    pub pairs: usize,
    pub pass: bool,
}

/// Entropy inequality over all pairs of `m`-uniform blocks of a grid of
/// `blocks` cells (kept off the endpoints), at `t ∈ {¼, ½, ¾}`.
pub fn wasserstein_block_scan(mm: &MmInterval, blocks: usize) -> Result<BlockScanReport> {
    if blocks < 2 {
        return Err(Error::Invalid("block scan needs at least two blocks".into()));
    }
    let times = [0.25, 0.5, 0.75];
    let (us, w) = u_nodes();
    let margin = 1e-3 * (mm.b - mm.a);
    let cell = (mm.b - mm.a - 2.0 * margin) / blocks as f64;
    let cells: Vec<(f64, f64)> = (0..blocks)
        .map(|i| {
            let lo = mm.a + margin + cell * i as f64;
            (lo + 0.1 * cell, lo + 0.9 * cell)
        })
        .collect();
    let q: Vec<Quantiles> = cells
        .iter()
        .map(|&(lo, hi)| quantiles(mm, &Measure1d::block(lo, hi), &us))
        .collect::<Result<_>>()?;
    let mut best = (f64::NEG_INFINITY, [0.0; 5]);
    let mut pairs = 0;
    for i in 0..blocks {
        for j in 0..blocks {
            if i == j {
                continue;
            }
            pairs += 1;
            for s in cd_samples(mm, &q[i], &q[j], &w, &times)? {
                if s.violation > best.0 {
                    best = (s.violation, [cells[i].0, cells[i].1, cells[j].0, cells[j].1, s.t]);
                }
            }
        }
    }
    Ok(BlockScanReport {
        max_violation: best.0,
        witness: best.1,
        pairs,
        pass: best.0 <= CD_TOL,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lebesgue(k: f64, n: f64) -> MmInterval {
        MmInterval::smooth(0.0, 1.0, ScalarField::constant(1.0, 1), k, n).unwrap()
    }

    #[test]
    fn uniform_blocks_flat() {
        let mm = lebesgue(0.0, 2.0);
        let r = wasserstein_1d_cd_check(&mm, &Measure1d::block(0.1, 0.2), &Measure1d::block(0.7, 0.9), &[0.25, 0.5, 0.75]).unwrap();
        assert!(r.pass, "{r:?}");
        // W₂ between uniform blocks: quantiles 0.1+0.1u and 0.7+0.2u
        let exact = ((0.6f64).powi(2) + 0.6 * 0.1 + 0.01 / 3.0).sqrt();
        assert!((r.w2 - exact).abs() < 1e-10, "{} vs {exact}", r.w2);
    }

    #[test]
    fn positive_k_on_flat_fails() {
        let mm = lebesgue(0.5, 2.0);
        let r = wasserstein_block_scan(&mm, 6).unwrap();
        assert!(!r.pass && r.max_violation > 0.0);
    }

    #[test]
    fn support_must_be_interior() {
        let mm = lebesgue(0.0, 2.0);
        assert!(w2(&mm, &Measure1d::block(0.0, 0.2), &Measure1d::block(0.5, 0.6)).is_err());
    }
}

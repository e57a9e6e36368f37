//! Quadrature rules, low-discrepancy sequences, a C^∞ smoothstep and
//! one-sided difference estimates.

use std::sync::OnceLock;

use crate::error::Result;
use crate::geom_core::scalar::Scalar;

/// Gauss–Legendre nodes and weights on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let p = if n == 0 { 1.0 } else { p1 };
            let pm1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (z * p - pm1) / (z * z - 1.0);
            let dz = p / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

/// 32-point rule, computed once.
pub fn gl32() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(32))
}

/// 8-point rule, computed once.
pub fn gl8() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(8))
}

/// Composite Gauss–Legendre integral of `f` over `[a, b]`.
pub fn integrate<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, panels: usize, rule: &(Vec<f64>, Vec<f64>)) -> f64 {
    let h = (b - a) / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let lo = a + h * p as f64;
        let mut s = 0.0;
        for (x, w) in rule.0.iter().zip(&rule.1) {
            s += w * f(lo + 0.5 * h * (x + 1.0));
        }
        total += 0.5 * h * s;
    }
    total
}

/// Fallible variant of [`integrate`].
pub fn try_integrate<F: FnMut(f64) -> Result<f64>>(
    mut f: F,
    a: f64,
    b: f64,
    panels: usize,
    rule: &(Vec<f64>, Vec<f64>),
) -> Result<f64> {
    let h = (b - a) / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let lo = a + h * p as f64;
        let mut s = 0.0;
        for (x, w) in rule.0.iter().zip(&rule.1) {
            s += w * f(lo + 0.5 * h * (x + 1.0))?;
        }
        total += 0.5 * h * s;
    }
    Ok(total)
}

/// C^∞ step: 1 on (−∞, 0], 0 on [1, ∞), strictly decreasing in between.
pub fn smoothstep<T: Scalar>(u: T) -> T {
    let v = u.value();
    if v <= 0.0 {
        return T::from_f64(1.0);
    }
    if v >= 1.0 {
        return T::from_f64(0.0);
    }
    let a = psi(T::from_f64(1.0) - u);
    let b = psi(u);
    a / (a + b)
}

fn psi<T: Scalar>(x: T) -> T {
    (-x.recip()).exp()
}

/// Halton radical inverse in base `b`.
pub fn radical_inverse(mut i: u64, b: u64) -> f64 {
    let mut f = 1.0;
    let mut r = 0.0;
    while i > 0 {
        f /= b as f64;
        r += f * (i % b) as f64;
        i /= b;
    }
    r
}

/// Kronecker (R_d) sequence point `i` in `[0,1)^d`, shifted by `seed`.
pub fn kronecker(i: u64, d: usize, seed: u64) -> Vec<f64> {
    // generalized golden ratio: the real root of x^(d+1) = x + 1
    let mut phi = 2.0f64;
    for _ in 0..64 {
        phi = (1.0 + phi).powf(1.0 / (d as f64 + 1.0));
    }
    let offset = radical_inverse(seed, 2);
    (0..d)
        .map(|k| {
            let alpha = 1.0 / phi.powi(k as i32 + 1);
            (0.5 + offset + alpha * (i as f64 + 1.0)).fract()
        })
        .collect()
}

/// Richardson-extrapolated 3-point one-sided derivative at `x0` in direction
/// `dir` (+1 or −1), with base step `s`.
pub fn one_sided_derivative<F: FnMut(f64) -> Result<f64>>(mut f: F, x0: f64, dir: f64, s: f64) -> Result<f64> {
    let f0 = f(x0)?;
    let mut d = [0.0; 3];
    for (k, h) in [s, s / 2.0, s / 4.0].into_iter().enumerate() {
        let f1 = f(x0 + dir * h)?;
        let f2 = f(x0 + dir * 2.0 * h)?;
        d[k] = dir * (-3.0 * f0 + 4.0 * f1 - f2) / (2.0 * h);
    }
    // error ~ h², so two levels of Richardson with factors 4 and 8
    let r1 = (4.0 * d[1] - d[0]) / 3.0;
    let r2 = (4.0 * d[2] - d[1]) / 3.0;
    Ok((8.0 * r2 - r1) / 7.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_exact_for_polynomials() {
        let (x, w) = gauss_legendre(8);
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(14)).sum();
        assert!((s - 2.0 / 15.0).abs() < 1e-14);
        let (x, w) = gl32().clone();
        let s: f64 = w.iter().sum();
        assert!((s - 2.0).abs() < 1e-14);
        assert!(x.windows(2).all(|p| p[0] < p[1]));
    }

    #[test]
    fn smoothstep_shape() {
        assert_eq!(smoothstep(-0.5), 1.0);
        assert_eq!(smoothstep(1.5), 0.0);
        assert!((smoothstep(0.5) - 0.5).abs() < 1e-15);
        let mut prev = 1.0;
        for i in 1..100 {
            let v = smoothstep(i as f64 / 100.0);
            assert!(v <= prev);
            if (5..95).contains(&i) {
                assert!(v < prev);
            }
            prev = v;
        }
    }

    #[test]
    fn one_sided_derivative_of_exp() {
        let d = one_sided_derivative(|x| Ok(x.exp()), 0.0, 1.0, 1e-3).unwrap();
        assert!((d - 1.0).abs() < 1e-11);
        let d = one_sided_derivative(|x| Ok(x.exp()), 0.0, -1.0, 1e-3).unwrap();
        assert!((d - 1.0).abs() < 1e-11);
    }

    #[test]
    fn kronecker_in_unit_cube() {
        for i in 0..100 {
            let p = kronecker(i, 3, 7);
            assert!(p.iter().all(|v| (0.0..1.0).contains(v)));
        }
    }
}

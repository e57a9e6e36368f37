//! Scalar types the expression evaluator runs on: plain `f64` and truncated
//! Taylor numbers in up to four variables.

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

pub const MAX_VARS: usize = 4;

pub trait Scalar:
    Copy
    + Debug
    + Send
    + Sync
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Add<f64, Output = Self>
    + Sub<f64, Output = Self>
    + Mul<f64, Output = Self>
{
    fn from_f64(c: f64) -> Self;

    fn value(&self) -> f64;

    /// Whether any derivative part is carried.
    fn has_derivatives(&self) -> bool;

    /// Composes a univariate function with `self`, given the function value
    /// and its first three derivatives at `self.value()`.
    fn chain(&self, d: [f64; 4]) -> Self;

    fn recip(&self) -> Self {
        let x = self.value();
        let r = 1.0 / x;
        self.chain([r, -r * r, 2.0 * r * r * r, -6.0 * r * r * r * r])
    }

    fn sin(&self) -> Self {
        let (s, c) = self.value().sin_cos();
        self.chain([s, c, -s, -c])
    }

    fn cos(&self) -> Self {
        let (s, c) = self.value().sin_cos();
        self.chain([c, -s, -c, s])
    }

    fn tan(&self) -> Self {
        let t = self.value().tan();
        let s = 1.0 + t * t;
        self.chain([t, s, 2.0 * t * s, 2.0 * s * (1.0 + 3.0 * t * t)])
    }

    fn exp(&self) -> Self {
        let e = self.value().exp();
        self.chain([e, e, e, e])
    }

    fn ln(&self) -> Self {
        let x = self.value();
        let r = 1.0 / x;
        self.chain([x.ln(), r, -r * r, 2.0 * r * r * r])
    }

    fn sqrt(&self) -> Self {
        let x = self.value();
        let s = x.sqrt();
        self.chain([
            s,
            0.5 / s,
            -0.25 / (s * x),
            0.375 / (s * x * x),
        ])
    }

    fn sinh(&self) -> Self {
        let x = self.value();
        let (s, c) = (x.sinh(), x.cosh());
        self.chain([s, c, s, c])
    }

    fn cosh(&self) -> Self {
        let x = self.value();
        let (s, c) = (x.sinh(), x.cosh());
        self.chain([c, s, c, s])
    }

    fn powi(&self, n: i32) -> Self {
        let x = self.value();
        let nf = n as f64;
        // a zero coefficient must not meet x^{negative} at x = 0
        let term = |coef: f64, k: i32| if coef == 0.0 { 0.0 } else if n - k == 0 { coef } else { coef * x.powi(n - k) };
        self.chain([
            term(1.0, 0),
            term(nf, 1),
            term(nf * (nf - 1.0), 2),
            term(nf * (nf - 1.0) * (nf - 2.0), 3),
        ])
    }

    /// `self^p` for a positive base.
    fn powf(&self, p: f64) -> Self {
        let x = self.value();
        let v = x.powf(p);
        self.chain([
            v,
            p * v / x,
            p * (p - 1.0) * v / (x * x),
            p * (p - 1.0) * (p - 2.0) * v / (x * x * x),
        ])
    }
}

impl Scalar for f64 {
    fn from_f64(c: f64) -> Self {
        c
    }
    fn value(&self) -> f64 {
        *self
    }
    fn has_derivatives(&self) -> bool {
        false
    }
    fn chain(&self, d: [f64; 4]) -> Self {
        d[0]
    }
    fn recip(&self) -> Self {
        1.0 / self
    }
    fn sin(&self) -> Self {
        f64::sin(*self)
    }
    fn cos(&self) -> Self {
        f64::cos(*self)
    }
    fn tan(&self) -> Self {
        f64::tan(*self)
    }
    fn exp(&self) -> Self {
        f64::exp(*self)
    }
    fn ln(&self) -> Self {
        f64::ln(*self)
    }
    fn sqrt(&self) -> Self {
        f64::sqrt(*self)
    }
    fn sinh(&self) -> Self {
        f64::sinh(*self)
    }
    fn cosh(&self) -> Self {
        f64::cosh(*self)
    }
    fn powi(&self, n: i32) -> Self {
        f64::powi(*self, n)
    }
    fn powf(&self, p: f64) -> Self {
        f64::powf(*self, p)
    }
}

/// Second-order truncated Taylor number: value, gradient and Hessian with
/// respect to `n` seeded variables.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Taylor2 {
    pub n: usize,
    pub v: f64,
    pub g: [f64; MAX_VARS],
    pub h: [[f64; MAX_VARS]; MAX_VARS],
}

impl Taylor2 {
    pub fn constant(c: f64) -> Self {
        Taylor2 {
            n: 0,
            v: c,
            g: [0.0; MAX_VARS],
            h: [[0.0; MAX_VARS]; MAX_VARS],
        }
    }

    pub fn variable(value: f64, index: usize, n: usize) -> Self {
        let mut t = Self::constant(value);
        t.n = n;
        t.g[index] = 1.0;
        t
    }

    /// Seeds every coordinate of `x` as an independent variable.
    pub fn seed(x: &[f64]) -> Vec<Taylor2> {
        let n = x.len();
        x.iter()
            .enumerate()
            .map(|(i, &xi)| Self::variable(xi, i, n))
            .collect()
    }
}

impl Scalar for Taylor2 {
    fn from_f64(c: f64) -> Self {
        Self::constant(c)
    }
    fn value(&self) -> f64 {
        self.v
    }
    fn has_derivatives(&self) -> bool {
        self.n > 0
    }
    fn chain(&self, d: [f64; 4]) -> Self {
        let n = self.n;
        let mut r = Self::constant(d[0]);
        r.n = n;
        for i in 0..n {
            r.g[i] = d[1] * self.g[i];
        }
        for i in 0..n {
            for j in i..n {
                let x = d[1] * self.h[i][j] + d[2] * self.g[i] * self.g[j];
                r.h[i][j] = x;
                r.h[j][i] = x;
            }
        }
        r
    }
}

impl Add for Taylor2 {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        let n = self.n.max(o.n);
        let mut r = Self::constant(self.v + o.v);
        r.n = n;
        for i in 0..n {
            r.g[i] = self.g[i] + o.g[i];
            for j in 0..n {
                r.h[i][j] = self.h[i][j] + o.h[i][j];
            }
        }
        r
    }
}

impl Sub for Taylor2 {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        let n = self.n.max(o.n);
        let mut r = Self::constant(self.v - o.v);
        r.n = n;
        for i in 0..n {
            r.g[i] = self.g[i] - o.g[i];
            for j in 0..n {
                r.h[i][j] = self.h[i][j] - o.h[i][j];
            }
        }
        r
    }
}

impl Mul for Taylor2 {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        let n = self.n.max(o.n);
        let mut r = Self::constant(self.v * o.v);
        r.n = n;
        for i in 0..n {
            r.g[i] = self.g[i] * o.v + self.v * o.g[i];
        }
        for i in 0..n {
            for j in i..n {
                let x = self.h[i][j] * o.v
                    + (self.g[i] * o.g[j] + self.g[j] * o.g[i])
                    + self.v * o.h[i][j];
                r.h[i][j] = x;
                r.h[j][i] = x;
            }
        }
        r
    }
}

impl Div for Taylor2 {
    type Output = Self;
    fn div(self, o: Self) -> Self {
        if o.n == 0 {
            return self * (1.0 / o.v);
        }
        self * o.recip()
    }
}

impl Neg for Taylor2 {
    type Output = Self;
    fn neg(self) -> Self {
        self * -1.0
    }
}

impl Add<f64> for Taylor2 {
    type Output = Self;
    fn add(mut self, c: f64) -> Self {
        self.v += c;
        self
    }
}

impl Sub<f64> for Taylor2 {
    type Output = Self;
    fn sub(mut self, c: f64) -> Self {
        self.v -= c;
        self
    }
}

impl Mul<f64> for Taylor2 {
    type Output = Self;
    fn mul(mut self, c: f64) -> Self {
        self.v *= c;
        for i in 0..self.n {
            self.g[i] *= c;
            for j in 0..self.n {
                self.h[i][j] *= c;
            }
        }
        self
    }
}

/// Third-order truncated Taylor number.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Taylor3 {
    pub n: usize,
    pub v: f64,
    pub g: [f64; MAX_VARS],
    pub h: [[f64; MAX_VARS]; MAX_VARS],
    pub t: [[[f64; MAX_VARS]; MAX_VARS]; MAX_VARS],
}

impl Taylor3 {
    pub fn constant(c: f64) -> Self {
        Taylor3 {
            n: 0,
            v: c,
            g: [0.0; MAX_VARS],
            h: [[0.0; MAX_VARS]; MAX_VARS],
            t: [[[0.0; MAX_VARS]; MAX_VARS]; MAX_VARS],
        }
    }

    pub fn variable(value: f64, index: usize, n: usize) -> Self {
        let mut t = Self::constant(value);
        t.n = n;
        t.g[index] = 1.0;
        t
    }

    pub fn seed(x: &[f64]) -> Vec<Taylor3> {
        let n = x.len();
        x.iter()
            .enumerate()
            .map(|(i, &xi)| Self::variable(xi, i, n))
            .collect()
    }

    fn set_sym3(&mut self, i: usize, j: usize, k: usize, x: f64) {
        for (a, b, c) in [
            (i, j, k),
            (i, k, j),
            (j, i, k),
            (j, k, i),
            (k, i, j),
            (k, j, i),
        ] {
            self.t[a][b][c] = x;
        }
    }

    fn blank(n: usize, v: f64) -> Self {
        let mut r = Self::constant(v);
        r.n = n;
        r
    }

    fn map_linear(&self, o: &Self, v: f64, f: impl Fn(f64, f64) -> f64) -> Self {
        let n = self.n.max(o.n);
        let mut r = Self::blank(n, v);
        for i in 0..n {
            r.g[i] = f(self.g[i], o.g[i]);
            for j in 0..n {
                r.h[i][j] = f(self.h[i][j], o.h[i][j]);
                for k in 0..n {
                    r.t[i][j][k] = f(self.t[i][j][k], o.t[i][j][k]);
                }
            }
        }
        r
    }
}

impl Scalar for Taylor3 {
    fn from_f64(c: f64) -> Self {
        Self::constant(c)
    }
    fn value(&self) -> f64 {
        self.v
    }
    fn has_derivatives(&self) -> bool {
        self.n > 0
    }
    fn chain(&self, d: [f64; 4]) -> Self {
        let n = self.n;
        let (g, h, t) = (&self.g, &self.h, &self.t);
        let mut r = Self::blank(n, d[0]);
        for i in 0..n {
            r.g[i] = d[1] * g[i];
        }
        for i in 0..n {
            for j in i..n {
                let x = d[1] * h[i][j] + d[2] * g[i] * g[j];
                r.h[i][j] = x;
                r.h[j][i] = x;
                for k in j..n {
                    let x = d[1] * t[i][j][k]
                        + d[2] * (h[i][j] * g[k] + h[i][k] * g[j] + h[j][k] * g[i])
                        + d[3] * g[i] * g[j] * g[k];
                    r.set_sym3(i, j, k, x);
                }
            }
        }
        r
    }
}

impl Add for Taylor3 {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        self.map_linear(&o, self.v + o.v, |a, b| a + b)
    }
}

impl Sub for Taylor3 {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        self.map_linear(&o, self.v - o.v, |a, b| a - b)
    }
}

impl Mul for Taylor3 {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        let n = self.n.max(o.n);
        let (a, b) = (&self, &o);
        let mut r = Self::blank(n, a.v * b.v);
        for i in 0..n {
            r.g[i] = a.g[i] * b.v + a.v * b.g[i];
        }
        for i in 0..n {
            for j in i..n {
                let x = a.h[i][j] * b.v + (a.g[i] * b.g[j] + a.g[j] * b.g[i]) + a.v * b.h[i][j];
                r.h[i][j] = x;
                r.h[j][i] = x;
                for k in j..n {
                    let x = a.t[i][j][k] * b.v
                        + a.h[i][j] * b.g[k]
                        + a.h[i][k] * b.g[j]
                        + a.h[j][k] * b.g[i]
                        + a.g[i] * b.h[j][k]
                        + a.g[j] * b.h[i][k]
                        + a.g[k] * b.h[i][j]
                        + a.v * b.t[i][j][k];
                    r.set_sym3(i, j, k, x);
                }
            }
        }
        r
    }
}

impl Div for Taylor3 {
    type Output = Self;
    fn div(self, o: Self) -> Self {
        if o.n == 0 {
            return self * (1.0 / o.v);
        }
        self * o.recip()
    }
}

impl Neg for Taylor3 {
    type Output = Self;
    fn neg(self) -> Self {
        self * -1.0
    }
}

impl Add<f64> for Taylor3 {
    type Output = Self;
    fn add(mut self, c: f64) -> Self {
        self.v += c;
        self
    }
}

impl Sub<f64> for Taylor3 {
    type Output = Self;
    fn sub(mut self, c: f64) -> Self {
        self.v -= c;
        self
    }
}

impl Mul<f64> for Taylor3 {
    type Output = Self;
    fn mul(self, c: f64) -> Self {
        let zero = Self::constant(0.0);
        self.map_linear(&zero, self.v * c, |a, _| a * c)
    }
}

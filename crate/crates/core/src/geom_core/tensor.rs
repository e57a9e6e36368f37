//! Christoffel symbols, curvature, covariant Hessians and generalized
//! eigenvalues.
//!
//! Conventions: `Γ^k_ij = ½ g^kl (∂_i g_jl + ∂_j g_il − ∂_l g_ij)`,
//! `R(X,Y)Z = ∇_X∇_Y Z − ∇_Y∇_X Z − ∇_[X,Y] Z`, `R_ijkl = ⟨R(∂_i,∂_j)∂_k, ∂_l⟩`,
//! so the sectional curvature of the plane (∂_i, ∂_j) is `R_ijji / |∂_i∧∂_j|²`
//! and `Ric_jk = g^il R_ijkl`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geom_core::chart::{MetricField, MetricJet, ScalarSource};
use crate::geom_core::linalg::{self, M4};
use crate::geom_core::scalar::Taylor2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TensorKind {
    Scalar,
    Covector,
    Vector,
    Bilinear,
    Operator,
    Christoffel,
    Curvature,
}

impl TensorKind {
    fn rank(self) -> usize {
        match self {
            TensorKind::Scalar => 0,
            TensorKind::Covector | TensorKind::Vector => 1,
            TensorKind::Bilinear | TensorKind::Operator => 2,
            TensorKind::Christoffel => 3,
            TensorKind::Curvature => 4,
        }
    }
}

/// Components of a tensor at a point, flattened row-major.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TensorValue {
    pub kind: TensorKind,
    pub dim: usize,
    pub point: Vec<f64>,
    pub data: Vec<f64>,
}

impl TensorValue {
    pub fn zeros(kind: TensorKind, dim: usize, point: &[f64]) -> Self {
        TensorValue {
            kind,
            dim,
            point: point.to_vec(),
            data: vec![0.0; dim.pow(kind.rank() as u32)],
        }
    }

    fn offset(&self, idx: &[usize]) -> usize {
        debug_assert_eq!(idx.len(), self.kind.rank());
        idx.iter().fold(0, |acc, &i| acc * self.dim + i)
    }

    pub fn get(&self, idx: &[usize]) -> f64 {
        self.data[self.offset(idx)]
    }

    pub fn set(&mut self, idx: &[usize], v: f64) {
        let o = self.offset(idx);
        self.data[o] = v;
    }

    pub fn from_matrix(kind: TensorKind, m: &M4, n: usize, point: &[f64]) -> Self {
        let mut t = Self::zeros(kind, n, point);
        for i in 0..n {
            for j in 0..n {
                t.data[i * n + j] = m[i][j];
            }
        }
        t
    }

    pub fn from_vector(kind: TensorKind, v: &[f64], point: &[f64]) -> Self {
        TensorValue {
            kind,
            dim: v.len(),
            point: point.to_vec(),
            data: v.to_vec(),
        }
    }

    pub fn matrix(&self) -> M4 {
        let n = self.dim;
        let mut m = linalg::ZERO;
        for i in 0..n {
            for j in 0..n {
                m[i][j] = self.data[i * n + j];
            }
        }
        m
    }
}

/// Metric, inverse metric, Christoffel symbols and their first derivatives
/// at a point.
#[derive(Clone, Debug)]
pub struct Connection {
    pub n: usize,
    pub g: M4,
    pub ginv: M4,
    /// `gamma[k][i][j] = Γ^k_ij`
    pub gamma: [M4; 4],
    /// `dgamma[m][k][i][j] = ∂_m Γ^k_ij`
    pub dgamma: [[M4; 4]; 4],
}

impl Connection {
    pub fn from_jet(mj: &MetricJet, x: &[f64]) -> Result<Connection> {
        let n = mj.n;
        let ginv = linalg::inverse(&mj.g, n).ok_or_else(|| Error::DegenerateMetric {
            point: x.to_vec(),
            reason: "singular metric".into(),
        })?;
        let dg = &mj.dg;
        // first-kind symbols: c[l][i][j] = ½(∂_i g_jl + ∂_j g_il − ∂_l g_ij)
        let mut c1 = [linalg::ZERO; 4];
        for l in 0..n {
            for i in 0..n {
                for j in i..n {
                    let v = 0.5 * (dg[i][j][l] + dg[j][i][l] - dg[l][i][j]);
                    c1[l][i][j] = v;
                    c1[l][j][i] = v;
                }
            }
        }
        let mut gamma = [linalg::ZERO; 4];
        for k in 0..n {
            for i in 0..n {
                for j in i..n {
                    let mut s = 0.0;
                    for l in 0..n {
                        s += ginv[k][l] * c1[l][i][j];
                    }
                    gamma[k][i][j] = s;
                    gamma[k][j][i] = s;
                }
            }
        }
        // ∂_m g^kl = −g^ka ∂_m g_ab g^bl
        let mut dginv = [linalg::ZERO; 4];
        for m in 0..n {
            let t = linalg::mat_mul(&linalg::mat_mul(&ginv, &dg[m], n), &ginv, n);
            for k in 0..n {
                for l in 0..n {
                    dginv[m][k][l] = -t[k][l];
                }
            }
        }
        let mut dgamma = [[linalg::ZERO; 4]; 4];
        for m in 0..n {
            let dd = &mj.ddg[m];
            for i in 0..n {
                for j in i..n {
                    let mut dc1 = [0.0; 4];
                    for (l, d) in dc1.iter_mut().enumerate().take(n) {
                        *d = 0.5 * (dd[i][j][l] + dd[j][i][l] - dd[l][i][j]);
                    }
                    for k in 0..n {
                        let mut s = 0.0;
                        for l in 0..n {
                            s += dginv[m][k][l] * c1[l][i][j] + ginv[k][l] * dc1[l];
                        }
                        dgamma[m][k][i][j] = s;
                        dgamma[m][k][j][i] = s;
                    }
                }
            }
        }
        Ok(Connection {
            n,
            g: mj.g,
            ginv,
            gamma,
            dgamma,
        })
    }

    /// `r[i][j][k][l] = R_ijkl`.
    pub fn riemann(&self) -> [[M4; 4]; 4] {
        let n = self.n;
        let (gm, dgm) = (&self.gamma, &self.dgamma);
        // R^l_ijk = ∂_i Γ^l_jk − ∂_j Γ^l_ik + Γ^l_im Γ^m_jk − Γ^l_jm Γ^m_ik
        let mut up = [[linalg::ZERO; 4]; 4];
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        let mut s = dgm[i][l][j][k] - dgm[j][l][i][k];
                        for m in 0..n {
                            s += gm[l][i][m] * gm[m][j][k] - gm[l][j][m] * gm[m][i][k];
                        }
                        up[i][j][k][l] = s;
                    }
                }
            }
        }
        let mut r = [[linalg::ZERO; 4]; 4];
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        let mut s = 0.0;
                        for m in 0..n {
                            s += self.g[l][m] * up[i][j][k][m];
                        }
                        r[i][j][k][l] = s;
                    }
                }
            }
        }
        r
    }

    /// Ricci contraction `Ric_jk = g^il R_ijkl`, before symmetrization.
    pub fn ricci_raw(&self, r: &[[M4; 4]; 4]) -> M4 {
        let n = self.n;
        let mut ric = linalg::ZERO;
        for j in 0..n {
            for k in 0..n {
                let mut s = 0.0;
                for i in 0..n {
                    for l in 0..n {
                        s += self.ginv[i][l] * r[i][j][k][l];
                    }
                }
                ric[j][k] = s;
            }
        }
        ric
    }

    /// Covariant Hessian `∂_i∂_j f − Γ^k_ij ∂_k f` of a scalar jet.
    pub fn hessian(&self, f: &Taylor2) -> M4 {
        let n = self.n;
        let mut h = linalg::ZERO;
        for i in 0..n {
            for j in i..n {
                let mut s = f.h[i][j];
                for k in 0..n {
                    s -= self.gamma[k][i][j] * f.g[k];
                }
                h[i][j] = s;
                h[j][i] = s;
            }
        }
        h
    }

    pub fn trace(&self, form: &M4) -> f64 {
        let n = self.n;
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                s += self.ginv[i][j] * form[i][j];
            }
        }
        s
    }

    pub fn raise(&self, covector: &[f64]) -> Vec<f64> {
        linalg::mat_vec(&self.ginv, covector, self.n)
    }
}

pub fn connection(m: &dyn MetricField, x: &[f64]) -> Result<Connection> {
    let mj = m.metric_jet(x)?;
    Connection::from_jet(&mj, x)
}

pub fn christoffel(m: &dyn MetricField, x: &[f64]) -> Result<TensorValue> {
    let c = connection(m, x)?;
    let n = c.n;
    let mut t = TensorValue::zeros(TensorKind::Christoffel, n, x);
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                t.set(&[k, i, j], c.gamma[k][i][j]);
            }
        }
    }
    Ok(t)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Curvature {
    pub riemann: TensorValue,
    pub ricci: TensorValue,
    pub scalar: f64,
}

pub fn curvature_from(c: &Connection, x: &[f64]) -> Curvature {
    let n = c.n;
    let r = c.riemann();
    let ric = linalg::symmetrize(&c.ricci_raw(&r), n);
    let mut riemann = TensorValue::zeros(TensorKind::Curvature, n, x);
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    riemann.set(&[i, j, k, l], r[i][j][k][l]);
                }
            }
        }
    }
    Curvature {
        riemann,
        scalar: c.trace(&ric),
        ricci: TensorValue::from_matrix(TensorKind::Bilinear, &ric, n, x),
    }
}

pub fn curvature(m: &dyn MetricField, x: &[f64]) -> Result<Curvature> {
    let c = connection(m, x)?;
    Ok(curvature_from(&c, x))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HessGrad {
    /// Gradient vector `g^ij ∂_j f`.
    pub grad: TensorValue,
    /// Differential `∂_i f`.
    pub differential: TensorValue,
    pub hess: TensorValue,
    pub laplacian: f64,
    pub gradnormsq: f64,
}

pub fn hessian_grad_from(c: &Connection, f: &Taylor2, x: &[f64]) -> HessGrad {
    let n = c.n;
    let df = &f.g[..n];
    let h = c.hessian(f);
    let grad = c.raise(df);
    let gradnormsq = grad.iter().zip(df).map(|(a, b)| a * b).sum();
    HessGrad {
        grad: TensorValue::from_vector(TensorKind::Vector, &grad, x),
        differential: TensorValue::from_vector(TensorKind::Covector, df, x),
        laplacian: c.trace(&h),
        hess: TensorValue::from_matrix(TensorKind::Bilinear, &h, n, x),
        gradnormsq,
    }
}

pub fn hessian_grad(m: &dyn MetricField, field: &dyn ScalarSource, x: &[f64]) -> Result<HessGrad> {
    let c = connection(m, x)?;
    let f = field.scalar_jet(x)?;
    Ok(hessian_grad_from(&c, &f, x))
}

pub const SYMMETRY_TOL: f64 = 1e-10;

/// Smallest λ with `form(v,v) = λ g(v,v)`.
pub fn min_generalized_eig_matrix(form: &M4, g: &M4, n: usize) -> Result<f64> {
    for (m, scale) in [(form, 1.0), (g, 1.0)] {
        let mut big: f64 = 1.0;
        for row in m.iter().take(n) {
            for v in row.iter().take(n) {
                big = big.max(v.abs());
            }
        }
        let a = linalg::max_asymmetry(m, n);
        if a > SYMMETRY_TOL * big * scale {
            return Err(Error::NonSymmetric { asymmetry: a });
        }
    }
    let vals = linalg::generalized_eigenvalues(&linalg::symmetrize(form, n), g, n).ok_or_else(|| {
        Error::DegenerateMetric {
            point: Vec::new(),
            reason: "metric not positive definite".into(),
        }
    })?;
    Ok(vals[0])
}

pub fn min_generalized_eig(form: &TensorValue, g: &TensorValue) -> Result<f64> {
    if form.dim != g.dim || form.kind.rank() != 2 || g.kind.rank() != 2 {
        return Err(Error::Invalid("expected two bilinear forms of equal dimension".into()));
    }
    min_generalized_eig_matrix(&form.matrix(), &g.matrix(), form.dim)
}

/// Largest λ with `form(v,v) = λ g(v,v)`.
pub fn max_generalized_eig_matrix(form: &M4, g: &M4, n: usize) -> Result<f64> {
    let mut neg = *form;
    for row in neg.iter_mut().take(n) {
        for v in row.iter_mut().take(n) {
            *v = -*v;
        }
    }
    Ok(-min_generalized_eig_matrix(&neg, g, n)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom_core::chart::{CoordBox, MetricChart, ScalarField};

    fn chart(lo: &[f64], hi: &[f64], diag: &[&str]) -> MetricChart {
        MetricChart::diagonal(CoordBox::new(lo.to_vec(), hi.to_vec()).unwrap(), diag).unwrap()
    }

    #[test]
    fn sphere_christoffel() {
        let m = chart(&[0.1, 0.0], &[3.0, 6.0], &["1", "sin(x1)^2"]);
        let x = [0.7, 1.0];
        let g = christoffel(&m, &x).unwrap();
        assert!((g.get(&[0, 1, 1]) + 0.7f64.sin() * 0.7f64.cos()).abs() < 1e-14);
        assert!((g.get(&[1, 0, 1]) - 0.7f64.cos() / 0.7f64.sin()).abs() < 1e-14);
        assert!((g.get(&[1, 1, 0]) - g.get(&[1, 0, 1])).abs() == 0.0);
    }

    #[test]
    fn sphere_and_hyperbolic_ricci() {
        let m = chart(&[0.1, 0.0], &[3.0, 6.0], &["1", "sin(x1)^2"]);
        let c = curvature(&m, &[1.1, 0.3]).unwrap();
        let g = m.metric_value(&[1.1, 0.3]).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert!((c.ricci.get(&[i, j]) - g[i][j]).abs() < 1e-12);
            }
        }
        assert!((c.scalar - 2.0).abs() < 1e-12);
        let h = chart(&[0.1, 0.0], &[3.0, 6.0], &["1", "sinh(x1)^2"]);
        let c = curvature(&h, &[0.9, 0.3]).unwrap();
        assert!((c.scalar + 2.0).abs() < 1e-12);
    }

    #[test]
    fn hessian_on_sphere() {
        let m = chart(&[0.1, 0.0], &[3.0, 6.0], &["1", "sin(x1)^2"]);
        let f = ScalarField::parse("cos(x1)", 2).unwrap();
        let x = [0.8, 2.0];
        let hg = hessian_grad(&m, &f, &x).unwrap();
        let g = m.metric_value(&x).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert!((hg.hess.get(&[i, j]) + 0.8f64.cos() * g[i][j]).abs() < 1e-13);
            }
        }
        assert!((hg.laplacian + 2.0 * 0.8f64.cos()).abs() < 1e-13);
    }

    #[test]
    fn generalized_eig_basics() {
        let g = linalg::identity(2);
        let f = linalg::from_rows(&[vec![2.0, 0.0], vec![0.0, 5.0]]);
        assert!((min_generalized_eig_matrix(&f, &g, 2).unwrap() - 2.0).abs() < 1e-14);
        let g = linalg::from_rows(&[vec![2.0, 0.3], vec![0.3, 1.0]]);
        assert!((min_generalized_eig_matrix(&g, &g, 2).unwrap() - 1.0).abs() < 1e-14);
        let bad = linalg::from_rows(&[vec![1.0, 0.5], vec![0.0, 1.0]]);
        assert!(matches!(
            min_generalized_eig_matrix(&bad, &g, 2),
            Err(Error::NonSymmetric { .. })
        ));
    }
}

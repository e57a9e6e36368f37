use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom_core::expr::Expr;
use crate::geom_core::linalg::{self, M4};
use crate::geom_core::scalar::{Scalar, Taylor2, Taylor3};

/// A parsed expression together with the number of coordinates it lives on.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarField {
    expr: Expr,
    arity: usize,
}

impl ScalarField {
    pub fn parse(text: &str, arity: usize) -> Result<Self> {
        if text.trim().is_empty() {
            return Err(Error::Syntax {
                offset: 0,
                message: "empty expression".into(),
            });
        }
        Ok(ScalarField {
            expr: Expr::parse(text, arity)?,
            arity,
        })
    }

    pub fn from_expr(expr: Expr, arity: usize) -> Result<Self> {
        if let Some(k) = expr.max_coord() {
            if k >= arity {
                return Err(Error::CoordinateOutOfRange {
                    index: k + 1,
                    arity,
                    offset: 0,
                });
            }
        }
        Ok(ScalarField { expr, arity })
    }

    pub fn constant(c: f64, arity: usize) -> Self {
        ScalarField {
            expr: Expr::Num(c),
            arity,
        }
    }

    pub fn expr(&self) -> &Expr {
        &self.expr
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn text(&self) -> String {
        self.expr.to_string()
    }

    pub fn eval<T: Scalar>(&self, x: &[T]) -> Result<T> {
        self.check_len(x.len())?;
        self.expr.eval(x)
    }

    pub fn value(&self, x: &[f64]) -> Result<f64> {
        self.eval(x)
    }

    pub fn taylor2(&self, x: &[f64]) -> Result<Taylor2> {
        self.eval(&Taylor2::seed(x))
    }

    pub fn derivative(&self, k: usize) -> ScalarField {
        ScalarField {
            expr: self.expr.derivative(k),
            arity: self.arity,
        }
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.arity {
            return Err(Error::Invalid(format!(
                "field of arity {} evaluated at a point with {} coordinates",
                self.arity, len
            )));
        }
        Ok(())
    }
}

pub fn parse_field(text: &str, arity: usize) -> Result<ScalarField> {
    ScalarField::parse(text, arity)
}

/// Partial derivatives of a scalar field at a point.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Jet {
    pub value: f64,
    pub first: Vec<f64>,
    pub second: Vec<Vec<f64>>,
    pub third: Option<Vec<Vec<Vec<f64>>>>,
}

/// Exact derivatives of `field` at `point` up to `order` (1, 2 or 3).
pub fn jet_eval(field: &ScalarField, point: &[f64], order: usize) -> Result<Jet> {
    if !(1..=3).contains(&order) {
        return Err(Error::Invalid(format!("jet order {order} not in 1..=3")));
    }
    let n = point.len();
    if order == 3 {
        let t = field.eval(&Taylor3::seed(point))?;
        return Ok(Jet {
            value: t.v,
            first: t.g[..n].to_vec(),
            second: (0..n).map(|i| t.h[i][..n].to_vec()).collect(),
            third: Some(
                (0..n)
                    .map(|i| (0..n).map(|j| t.t[i][j][..n].to_vec()).collect())
                    .collect(),
            ),
        });
    }
    let t = field.taylor2(point)?;
    Ok(Jet {
        value: t.v,
        first: t.g[..n].to_vec(),
        second: if order == 2 {
            (0..n).map(|i| t.h[i][..n].to_vec()).collect()
        } else {
            Vec::new()
        },
        third: None,
    })
}

/// Closed coordinate box.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoordBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl CoordBox {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.len() != hi.len() || lo.is_empty() {
            return Err(Error::Invalid("domain bounds have mismatched lengths".into()));
        }
        for (a, b) in lo.iter().zip(&hi) {
            if !(a.is_finite() && b.is_finite() && a < b) {
                return Err(Error::Invalid(format!("empty or non-finite interval [{a}, {b}]")));
            }
        }
        Ok(CoordBox { lo, hi })
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x.iter().zip(self.lo.iter().zip(&self.hi)).all(|(v, (a, b))| {
                let tol = 1e-12 * (1.0 + a.abs().max(b.abs()));
                *v >= a - tol && *v <= b + tol
            })
    }

    /// `res` points per axis strictly inside each interval, one grid step
    /// away from the faces, in row-major order (first coordinate slowest).
    pub fn interior_grid(&self, res: usize) -> Vec<Vec<f64>> {
        let axes: Vec<Vec<f64>> = (0..self.dim())
            .map(|k| {
                let (a, b) = (self.lo[k], self.hi[k]);
                let step = (b - a) / (res as f64 + 1.0);
                (1..=res).map(|i| a + step * i as f64).collect()
            })
            .collect();
        tensor_grid(&axes)
    }
}

pub fn tensor_grid(axes: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut out = vec![Vec::new()];
    for axis in axes {
        let mut next = Vec::with_capacity(out.len() * axis.len());
        for p in &out {
            for &v in axis {
                let mut q = p.clone();
                q.push(v);
                next.push(q);
            }
        }
        out = next;
    }
    out
}

/// Metric value with first and second partial derivatives at a point.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricJet {
    pub n: usize,
    pub g: M4,
    /// `dg[k][i][j] = ∂_k g_ij`
    pub dg: [M4; 4],
    /// `ddg[k][l][i][j] = ∂_k ∂_l g_ij`
    pub ddg: [[M4; 4]; 4],
}

impl MetricJet {
    pub fn from_taylor(n: usize, g: &[Vec<Taylor2>]) -> MetricJet {
        let mut mj = MetricJet {
            n,
            g: linalg::ZERO,
            dg: [linalg::ZERO; 4],
            ddg: [[linalg::ZERO; 4]; 4],
        };
        for i in 0..n {
            for j in 0..n {
                let t = &g[i][j];
                mj.g[i][j] = t.v;
                for k in 0..n {
                    mj.dg[k][i][j] = t.g[k];
                    for l in 0..n {
                        mj.ddg[k][l][i][j] = t.h[k][l];
                    }
                }
            }
        }
        mj
    }
}

/// Anything that yields a metric jet at a point.
pub trait MetricField: Send + Sync {
    fn dim(&self) -> usize;

    fn metric_jet(&self, x: &[f64]) -> Result<MetricJet>;

    /// Index of the coordinate whose sign selects a side for piecewise
    /// metrics; `None` for smooth ones.
    fn interface(&self) -> Option<usize> {
        None
    }

    /// Jet of the smooth extension of the given side (0: coordinate ≥ 0,
    /// 1: coordinate ≤ 0) for piecewise metrics.
    fn metric_jet_on_side(&self, x: &[f64], _side: usize) -> Result<MetricJet> {
        self.metric_jet(x)
    }

    /// Whether `x` lies in the chart; integrators stop when it does not.
    fn contains(&self, _x: &[f64]) -> bool {
        true
    }
}

/// Anything that yields a second-order scalar jet at a point.
pub trait ScalarSource: Send + Sync {
    fn scalar_jet(&self, x: &[f64]) -> Result<Taylor2>;

    fn scalar_jet_on_side(&self, x: &[f64], _side: usize) -> Result<Taylor2> {
        self.scalar_jet(x)
    }
}

impl ScalarSource for ScalarField {
    fn scalar_jet(&self, x: &[f64]) -> Result<Taylor2> {
        self.taylor2(x)
    }
}

/// Index into the upper-triangular, row-major component list.
pub fn sym_index(n: usize, i: usize, j: usize) -> usize {
    let (i, j) = if i <= j { (i, j) } else { (j, i) };
    i * n - i * (i + 1) / 2 + j
}

/// A single coordinate box with metric components given as expressions.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricChart {
    dim: usize,
    domain: CoordBox,
    components: Vec<ScalarField>,
}

impl MetricChart {
    /// `components` lists g_ij for i ≤ j in row-major order.
    pub fn new(domain: CoordBox, components: Vec<ScalarField>) -> Result<Self> {
        let n = domain.dim();
        if !(1..=4).contains(&n) {
            return Err(Error::Invalid(format!("chart dimension {n} outside 1..=4")));
        }
        if components.len() != n * (n + 1) / 2 {
            return Err(Error::Invalid(format!(
                "a {n}-dimensional metric needs {} components, got {}",
                n * (n + 1) / 2,
                components.len()
            )));
        }
        if let Some(c) = components.iter().find(|c| c.arity() != n) {
            return Err(Error::Invalid(format!(
                "metric component of arity {} in a {n}-dimensional chart",
                c.arity()
            )));
        }
        Ok(MetricChart {
            dim: n,
            domain,
            components,
        })
    }

    pub fn parse(domain: CoordBox, components: &[&str]) -> Result<Self> {
        let n = domain.dim();
        let comps = components
            .iter()
            .map(|s| ScalarField::parse(s, n))
            .collect::<Result<Vec<_>>>()?;
        Self::new(domain, comps)
    }

    pub fn diagonal(domain: CoordBox, diag: &[&str]) -> Result<Self> {
        let n = domain.dim();
        let mut comps = Vec::new();
        for i in 0..n {
            for j in i..n {
                comps.push(if i == j {
                    ScalarField::parse(diag[i], n)?
                } else {
                    ScalarField::constant(0.0, n)
                });
            }
        }
        Self::new(domain, comps)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn domain(&self) -> &CoordBox {
        &self.domain
    }

    pub fn components(&self) -> &[ScalarField] {
        &self.components
    }

    pub fn component(&self, i: usize, j: usize) -> &ScalarField {
        &self.components[sym_index(self.dim, i, j)]
    }

    /// Full symmetric matrix of components at `x`, ignoring the domain.
    pub fn metric_at<T: Scalar>(&self, x: &[T]) -> Result<Vec<Vec<T>>> {
        let n = self.dim;
        let vals = self
            .components
            .iter()
            .map(|c| c.eval(x))
            .collect::<Result<Vec<T>>>()?;
        Ok((0..n)
            .map(|i| (0..n).map(|j| vals[sym_index(n, i, j)]).collect())
            .collect())
    }

    pub fn metric_value(&self, x: &[f64]) -> Result<M4> {
        self.check(x)?;
        let g = self.metric_at(x)?;
        Ok(linalg::from_rows(&g))
    }

    pub fn check(&self, x: &[f64]) -> Result<()> {
        if !self.domain.contains(x) {
            return Err(Error::OutsideDomain { point: x.to_vec() });
        }
        Ok(())
    }

    /// Metric jet of the analytic extension, with no domain check.
    pub fn metric_jet_unchecked(&self, x: &[f64]) -> Result<MetricJet> {
        let g = self.metric_at(&Taylor2::seed(x))?;
        let mj = MetricJet::from_taylor(self.dim, &g);
        check_nondegenerate(&mj.g, self.dim, x)?;
        Ok(mj)
    }

    pub fn unbounded(&self) -> Unbounded<'_> {
        Unbounded(self)
    }
}

impl MetricField for MetricChart {
    fn dim(&self) -> usize {
        self.dim
    }

    fn metric_jet(&self, x: &[f64]) -> Result<MetricJet> {
        self.check(x)?;
        self.metric_jet_unchecked(x)
    }

    fn contains(&self, x: &[f64]) -> bool {
        self.domain.contains(x)
    }
}

/// A chart evaluated without domain checks, for integrators that step
/// slightly past a face.
#[derive(Clone, Copy, Debug)]
pub struct Unbounded<'a>(pub &'a MetricChart);

impl MetricField for Unbounded<'_> {
    fn dim(&self) -> usize {
        self.0.dim
    }

    fn metric_jet(&self, x: &[f64]) -> Result<MetricJet> {
        self.0.metric_jet_unchecked(x)
    }
}

pub const MIN_METRIC_EIGENVALUE: f64 = 1e-10;
pub const MAX_CONDITION: f64 = 1e12;

/// Rejects metrics with a tiny eigenvalue or a huge condition number.
pub fn check_nondegenerate(g: &M4, n: usize, x: &[f64]) -> Result<()> {
    let (vals, _) = linalg::sym_eigen(g, n);
    let (lo, hi) = (vals[0], vals[n - 1]);
    if !lo.is_finite() || !hi.is_finite() || lo <= MIN_METRIC_EIGENVALUE {
        return Err(Error::DegenerateMetric {
            point: x.to_vec(),
            reason: format!("smallest eigenvalue {lo:e}"),
        });
    }
    if hi / lo > MAX_CONDITION {
        return Err(Error::DegenerateMetric {
            point: x.to_vec(),
            reason: format!("condition number {:e}", hi / lo),
        });
    }
    Ok(())
}

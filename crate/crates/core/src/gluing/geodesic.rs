use serde::Serialize;

use crate::error::{Error, Result};
use crate::geom_core::chart::MetricField;
use crate::geom_core::linalg;
use crate::geom_core::tensor::Connection;

pub const ENERGY_TOL: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GeodesicSample {
    pub s: f64,
    pub x: Vec<f64>,
    pub v: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GeodesicPath {
    pub samples: Vec<GeodesicSample>,
    /// Stopped at the chart edge before reaching the requested length.
    pub truncated: bool,
    /// Parameter values where the interface was crossed.
    pub crossings: Vec<f64>,
    /// Largest relative change of `g(v, v)`.
    pub energy_drift: f64,
}

impl GeodesicPath {
    pub fn length(&self) -> f64 {
        self.samples.last().map_or(0.0, |s| s.s)
    }
}

type State = (Vec<f64>, Vec<f64>);

fn accel(metric: &dyn MetricField, side: usize, x: &[f64], v: &[f64]) -> Result<Vec<f64>> {
    let mj = metric.metric_jet_on_side(x, side)?;
    let c = Connection::from_jet(&mj, x)?;
    let n = c.n;
    Ok((0..n)
        .map(|k| {
            let mut a = 0.0;
            for i in 0..n {
                for j in 0..n {
                    a -= c.gamma[k][i][j] * v[i] * v[j];
                }
            }
            a
        })
        .collect())
}

fn rk4(metric: &dyn MetricField, side: usize, st: &State, dt: f64) -> Result<State> {
    let (x, v) = st;
    let shift = |a: &[f64], b: &[f64], c: f64| -> Vec<f64> { a.iter().zip(b).map(|(p, q)| p + c * q).collect() };
    let a1 = accel(metric, side, x, v)?;
    let (x2, v2) = (shift(x, v, 0.5 * dt), shift(v, &a1, 0.5 * dt));
    let a2 = accel(metric, side, &x2, &v2)?;
    let (x3, v3) = (shift(x, &v2, 0.5 * dt), shift(v, &a2, 0.5 * dt));
    let a3 = accel(metric, side, &x3, &v3)?;
    let (x4, v4) = (shift(x, &v3, dt), shift(v, &a3, dt));
    let a4 = accel(metric, side, &x4, &v4)?;
    let n = x.len();
    let xn = (0..n).map(|i| x[i] + dt / 6.0 * (v[i] + 2.0 * v2[i] + 2.0 * v3[i] + v4[i])).collect();
    let vn = (0..n).map(|i| v[i] + dt / 6.0 * (a1[i] + 2.0 * a2[i] + 2.0 * a3[i] + a4[i])).collect();
    Ok((xn, vn))
}

fn energy(metric: &dyn MetricField, side: usize, x: &[f64], v: &[f64]) -> Result<f64> {
    let mj = metric.metric_jet_on_side(x, side)?;
    Ok(linalg::quad(&mj.g, v, v, mj.n))
}

/// Side whose closed half contains the motion from `x` along `v`.
fn side_at(k: usize, x: &[f64], v: &[f64]) -> usize {
    if x[k] > 0.0 || (x[k] == 0.0 && v[k] >= 0.0) {
        0
    } else {
        1
    }
}

/// Integrates the geodesic equation with fixed-step RK4. Steps that cross
/// the interface are split at the crossing, located by bisection.
pub fn geodesic_integrate(
    metric: &dyn MetricField,
    start: &[f64],
    velocity: &[f64],
    length: f64,
    step: f64,
) -> Result<GeodesicPath> {
    let n = metric.dim();
    if start.len() != n || velocity.len() != n {
        return Err(Error::Invalid("start and velocity must match the dimension".into()));
    }
    if !(step > 0.0) || !(length >= 0.0) {
        return Err(Error::Invalid("step must be positive and length non-negative".into()));
    }
    if !metric.contains(start) {
        return Err(Error::OutsideDomain { point: start.to_vec() });
    }
    let iface = metric.interface();
    let mut side = iface.map_or(0, |k| side_at(k, start, velocity));
    let mut st: State = (start.to_vec(), velocity.to_vec());
    let e0 = energy(metric, side, start, velocity)?;
    if e0 <= 0.0 {
        return Err(Error::Invalid("initial velocity has zero length".into()));
    }
    let mut s = 0.0;
    let mut path = GeodesicPath {
        samples: vec![GeodesicSample {
            s,
            x: st.0.clone(),
            v: st.1.clone(),
        }],
        truncated: false,
        crossings: Vec::new(),
        energy_drift: 0.0,
    };
    while s < length - 1e-14 {
        let mut dt = step.min(length - s);
        let mut next = match rk4(metric, side, &st, dt) {
            Err(Error::OutsideDomain { .. }) => {
                path.truncated = true;
                break;
            }
            r => r?,
        };
        if let Some(k) = iface {
            let crossed = (side == 0 && next.0[k] < 0.0) || (side == 1 && next.0[k] > 0.0);
            if crossed && st.0[k] != 0.0 {
                let (mut lo, mut hi) = (0.0, dt);
                for _ in 0..60 {
                    let mid = 0.5 * (lo + hi);
                    let p = rk4(metric, side, &st, mid)?;
                    if (p.0[k] > 0.0) == (st.0[k] > 0.0) {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                dt = hi;
                next = rk4(metric, side, &st, dt)?;
                next.0[k] = 0.0;
                side = 1 - side;
                path.crossings.push(s + dt);
            } else if crossed {
                side = 1 - side;
                next = rk4(metric, side, &st, dt)?;
            }
        }
        if !metric.contains(&next.0) {
            path.truncated = true;
            break;
        }
        s += dt;
        st = next;
        let e = energy(metric, side, &st.0, &st.1)?;
        path.energy_drift = path.energy_drift.max((e - e0).abs() / e0);
        path.samples.push(GeodesicSample {
            s,
            x: st.0.clone(),
            v: st.1.clone(),
        });
    }
    if path.energy_drift > ENERGY_TOL * s.max(1.0) {
        return Err(Error::EnergyDrift {
            drift: path.energy_drift,
            s,
        });
    }
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom_core::chart::{CoordBox, MetricChart};

    #[test]
    fn sphere_equator_is_a_geodesic() {
        // (θ, φ) with g = diag(1, sin²θ)
        let d = CoordBox::new(vec![0.1, -10.0], vec![3.0, 10.0]).unwrap();
        let m = MetricChart::diagonal(d, &["1", "sin(x1)^2"]).unwrap();
        let p = geodesic_integrate(&m, &[std::f64::consts::FRAC_PI_2, 0.0], &[0.0, 1.0], 3.0, 0.01).unwrap();
        let last = p.samples.last().unwrap();
        assert!((last.x[0] - std::f64::consts::FRAC_PI_2).abs() < 1e-12);
        assert!((last.x[1] - 3.0).abs() < 1e-10);
        assert!(!p.truncated);
    }

    #[test]
    fn chart_exit_truncates() {
        let d = CoordBox::new(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap();
        let m = MetricChart::diagonal(d, &["1", "1"]).unwrap();
        let p = geodesic_integrate(&m, &[0.5, 0.5], &[1.0, 0.0], 2.0, 0.01).unwrap();
        assert!(p.truncated);
        assert!(p.length() < 0.5 + 1e-9);
    }
}

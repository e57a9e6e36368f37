#![allow(dead_code)]

use std::f64::consts::PI;

use cdglue::curvature::{Face, FaceRole, Side, WeightedManifold};
use cdglue::geom_core::{CoordBox, MetricChart, ScalarField};
use cdglue::gluing::{assemble, CollarGluedSpace};

pub fn field(s: &str, arity: usize) -> ScalarField {
    ScalarField::parse(s, arity).unwrap()
}

pub fn glue_face() -> Face {
    Face {
        coord: 1,
        side: Side::Min,
        role: FaceRole::Glue,
    }
}

/// Fermi collar over the circle `[0, 2π]` with `g = diag(g11, 1)`.
pub fn collar(g11: &str, weight: &str, depth: f64, n: f64) -> WeightedManifold {
    let dom = CoordBox::new(vec![0.0, 0.0], vec![2.0 * PI, depth]).unwrap();
    let chart = MetricChart::diagonal(dom, &[g11, "1"]).unwrap();
    WeightedManifold::new(chart, field(weight, 2), n, vec![glue_face()]).unwrap()
}

pub fn doubled(g11: &str, weight: &str, depth: f64, n: f64) -> CollarGluedSpace {
    assemble(collar(g11, weight, depth, n), collar(g11, weight, depth, n)).unwrap()
}

pub fn disk() -> CollarGluedSpace {
    doubled("(1-x2)^2", "1", 0.9, 2.0)
}

pub fn annulus() -> CollarGluedSpace {
    doubled("(1+x2)^2", "1", 0.9, 2.0)
}

pub fn hemisphere() -> CollarGluedSpace {
    doubled("cos(x2)^2", "1", 1.0, 2.0)
}

pub fn weighted_disk() -> CollarGluedSpace {
    doubled("(1-x2)^2", "1+x2", 0.9, 3.0)
}

/// Fourth-order central difference.
pub fn fd4<F: Fn(f64) -> f64>(f: F, x: f64, h: f64) -> f64 {
    (-f(x + 2.0 * h) + 8.0 * f(x + h) - 8.0 * f(x - h) + f(x - 2.0 * h)) / (12.0 * h)
}

/// Fourth-order central second difference.
pub fn fd4_second<F: Fn(f64) -> f64>(f: F, x: f64, h: f64) -> f64 {
    (-f(x + 2.0 * h) + 16.0 * f(x + h) - 30.0 * f(x) + 16.0 * f(x - h) - f(x - 2.0 * h)) / (12.0 * h * h)
}

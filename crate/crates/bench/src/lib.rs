//! Fixtures shared by the benchmarks in `benches/`.

use cdglue::curvature::{Face, FaceRole, Side, WeightedManifold};
use cdglue::geom_core::{CoordBox, MetricChart, ScalarField};
use cdglue::gluing::{assemble, CollarGluedSpace};

/// Fermi collar over the full circle with metric `diag(g11, 1)`.
pub fn collar(g11: &str, weight: &str, depth: f64, n: f64) -> WeightedManifold {
    let dom = CoordBox::new(vec![0.0, 0.0], vec![2.0 * std::f64::consts::PI, depth]).unwrap();
    let chart = MetricChart::diagonal(dom, &[g11, "1"]).unwrap();
    let face = Face {
        coord: 1,
        side: Side::Min,
        role: FaceRole::Glue,
    };
    WeightedManifold::new(chart, ScalarField::parse(weight, 2).unwrap(), n, vec![face]).unwrap()
}

pub fn disk_doubling() -> CollarGluedSpace {
    let side = collar("(1-x2)^2", "1", 0.9, 2.0);
    assemble(side.clone(), side).unwrap()
}

pub fn hemisphere_doubling() -> CollarGluedSpace {
    let side = collar("cos(x2)^2", "1", 1.0, 2.0);
    assemble(side.clone(), side).unwrap()
}

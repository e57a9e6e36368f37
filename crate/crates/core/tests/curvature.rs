mod common;

use std::f64::consts::PI;

use cdglue::curvature::{
    albi_check, bakry_emery, boundary_geometry, ricci_bound_sweep, weight_concavity_check, Branch, Face, FaceRole,
    LNorm, Side, WeightedManifold,
};
use cdglue::geom_core::{curvature, hessian_grad, jet_eval, CoordBox, MetricChart, Taylor3};
use cdglue::geom_core::Scalar;
use common::{collar, field, glue_face};
use proptest::prelude::*;

fn interval(lo: f64, hi: f64, weight: &str, n: f64) -> WeightedManifold {
    let chart = MetricChart::diagonal(CoordBox::new(vec![lo], vec![hi]).unwrap(), &["1"]).unwrap();
    WeightedManifold::new(chart, field(weight, 1), n, vec![]).unwrap()
}

fn cap() -> WeightedManifold {
    let chart = MetricChart::diagonal(CoordBox::new(vec![0.1, 0.0], vec![1.2, 2.0 * PI]).unwrap(), &["1", "sin(x1)^2"]).unwrap();
    WeightedManifold::new(chart, field("1", 2), 2.0, vec![]).unwrap()
}

/// Weighted plane patch used by the identity tests.
fn weighted_patch(n: f64) -> WeightedManifold {
    let chart = MetricChart::parse(
        CoordBox::new(vec![-1.0, -1.0], vec![1.0, 1.0]).unwrap(),
        &["1 + 0.2*sin(x2)^2", "0.1*x1*x2", "exp(0.3*x1)"],
    )
    .unwrap();
    WeightedManifold::new(chart, field("2 + sin(x1) * cos(x2) + 0.3*x2", 2), n, vec![]).unwrap()
}

#[test]
fn sphere_cap_and_flat_sweeps() {
    let r = ricci_bound_sweep(&cap(), 12).unwrap();
    assert!((r.min_eig - 1.0).abs() < 1e-8, "{r:?}");
    let flat = MetricChart::diagonal(CoordBox::new(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap(), &["1", "1"]).unwrap();
    let wm = WeightedManifold::new(flat, field("1", 2), 2.0, vec![]).unwrap();
    assert!(ricci_bound_sweep(&wm, 8).unwrap().min_eig.abs() < 1e-12);
}

#[test]
fn sin_weight_on_interval() {
    // (sin^{N−1}, N) on an interval has Bakry-Émery curvature N − 1
    for n in [2.0, 3.0, 4.5] {
        let wm = interval(0.1, PI - 0.1, &format!("sin(x1)^{}", n - 1.0), n);
        let r = ricci_bound_sweep(&wm, 30).unwrap();
        assert!((r.min_eig - (n - 1.0)).abs() < 1e-8, "N = {n}: {r:?}");
    }
}

#[test]
fn critical_and_subcritical_branches() {
    let wm = interval(0.0, 1.0, "1", 1.0);
    assert!(matches!(bakry_emery(&wm, &[0.5]).unwrap().branch, Branch::Critical { .. }));
    assert_eq!(bakry_emery(&wm, &[0.5]).unwrap().lambda_min().unwrap(), 0.0);
    let wm = interval(0.0, 1.0, "exp(x1)", 1.0);
    assert_eq!(bakry_emery(&wm, &[0.5]).unwrap().lambda_min().unwrap(), f64::NEG_INFINITY);
}

#[test]
fn disk_boundary_geometry() {
    let wm = collar("(1-x2)^2", "1", 0.9, 2.0);
    for y in [0.3, 2.0, 5.5] {
        let b = boundary_geometry(&wm, glue_face(), &[y, 0.0]).unwrap();
        assert!((b.sff.get(&[0, 0]) - 1.0).abs() < 1e-12);
        assert!((b.trace - 1.0).abs() < 1e-12 && (b.h_phi - 1.0).abs() < 1e-12);
        assert!((b.normal[1] - 1.0).abs() < 1e-12 && b.normal[0].abs() < 1e-12);
    }
    let wm = collar("(1-x2)^2", "1+x2", 0.9, 3.0);
    let b = boundary_geometry(&wm, glue_face(), &[1.0, 0.0]).unwrap();
    assert!(b.h_phi.abs() < 1e-12 && (b.trace - 1.0).abs() < 1e-12);
    let wm = collar("cos(x2)^2", "1", 1.0, 2.0);
    assert!(boundary_geometry(&wm, glue_face(), &[1.0, 0.0]).unwrap().trace.abs() < 1e-12);
}

#[test]
fn boundary_off_face_is_rejected() {
    let wm = collar("(1-x2)^2", "1", 0.9, 2.0);
    assert!(boundary_geometry(&wm, glue_face(), &[1.0, 0.3]).is_err());
}

#[test]
fn max_face_normal_points_inward() {
    let face = Face {
        coord: 1,
        side: Side::Max,
        role: FaceRole::Free,
    };
    let base = collar("(1-x2)^2", "1", 0.9, 2.0);
    let wm = WeightedManifold::new(base.chart, base.weight, 2.0, vec![glue_face(), face]).unwrap();
    let b = boundary_geometry(&wm, face, &[1.0, 0.9]).unwrap();
    assert!((b.normal[1] + 1.0).abs() < 1e-12);
    // inner circle of radius 0.1 of an annulus: trace −1/r
    assert!((b.trace + 10.0).abs() < 1e-9, "{}", b.trace);
}

/// `Ric − ∇²log Φ − d log Φ ⊗ d log Φ/(N−n)`, assembled from independent
/// pieces: chart Ricci plus the Hessian of the scalar field `log Φ`.
fn alternative_form(wm: &WeightedManifold, p: &[f64]) -> [[f64; 2]; 2] {
    let ric = curvature(&wm.chart, p).unwrap().ricci;
    let logphi = field(&format!("log({})", wm.weight.text()), 2);
    let hg = hessian_grad(&wm.chart, &logphi, p).unwrap();
    let d = &hg.differential.data;
    let gap = wm.n_synth - 2.0;
    let mut out = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = ric.get(&[i, j]) - hg.hess.get(&[i, j]) - d[i] * d[j] / gap;
        }
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn bakry_emery_alternative_form(x in -0.9f64..0.9, y in -0.9f64..0.9, n in 2.2f64..9.0) {
        let wm = weighted_patch(n);
        let be = bakry_emery(&wm, &[x, y]).unwrap();
        let t = be.tensor.unwrap();
        let alt = alternative_form(&wm, &[x, y]);
        for i in 0..2 {
            for j in 0..2 {
                prop_assert!((t.get(&[i, j]) - alt[i][j]).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn bakry_emery_is_monotone_in_n(x in -0.9f64..0.9, y in -0.9f64..0.9, n in 2.2f64..6.0, dn in 0.1f64..5.0) {
        let lo = bakry_emery(&weighted_patch(n), &[x, y]).unwrap().lambda_min().unwrap();
        let hi = bakry_emery(&weighted_patch(n + dn), &[x, y]).unwrap().lambda_min().unwrap();
        prop_assert!(hi >= lo - 1e-12);
    }
}

#[test]
fn weight_concavity_cases() {
    // f = Φ^{1/(N−n)} = sin: ∇²f + θf = (θ−1) sin
    let wm = interval(0.1, PI - 0.1, "sin(x1)^2", 3.0);
    let r = weight_concavity_check(&wm, -1.0, 1.0, 40).unwrap();
    assert!(r.pass && r.max_eig.abs() < 1e-12, "{r:?}");
    let r = weight_concavity_check(&wm, -1.5, 2.0, 40).unwrap();
    assert!(!r.pass && r.max_eig > 0.0);
    // θ = min(−κ̄, η) picks the smaller bound
    assert!(weight_concavity_check(&wm, -3.0, 0.5, 40).unwrap().pass);
    // critical N has no warp factor
    assert!(weight_concavity_check(&interval(0.0, 1.0, "1", 1.0), 0.0, 0.0, 5).is_err());
}

#[test]
fn albi_cases() {
    // f = sin: |∇f|² + f² = 1 and f² ≤ 1
    let wm = interval(0.1, PI - 0.1, "sin(x1)^2", 3.0);
    let r = albi_check(&wm, 1.0, 1.0, LNorm::Linear, 40).unwrap();
    assert!(r.pass && r.max_gradient.abs() < 1e-12, "{r:?}");
    let r = albi_check(&wm, 1.0, 0.9, LNorm::Linear, 40).unwrap();
    assert!(!r.pass && r.max_gradient > 0.0);
    // L² variant: L = 1.2 gives L² = 1.44, so only the level condition binds
    let r = albi_check(&wm, 1.0, 1.2, LNorm::Squared, 40).unwrap();
    assert!(r.pass);
}

#[test]
fn taylor3_power_at_zero_base_is_finite() {
    let x = Taylor3::variable(0.0, 0, 1);
    let y = x.powi(2);
    assert_eq!((y.v, y.g[0], y.h[0][0], y.t[0][0][0]), (0.0, 0.0, 2.0, 0.0));
    let j = jet_eval(&field("x1^2 + x1^3", 1), &[0.0], 3).unwrap();
    assert_eq!(j.third.unwrap()[0][0][0], 6.0);
}

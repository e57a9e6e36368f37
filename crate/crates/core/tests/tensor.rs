mod common;

use cdglue::geom_core::{
    christoffel, curvature, hessian_grad, jet_eval, min_generalized_eig_matrix, CoordBox, MetricChart, ScalarField,
};
use cdglue::geom_core::linalg::{self, M4};
use common::{fd4, fd4_second, field};
use nalgebra::{DMatrix, SymmetricEigen};
use proptest::prelude::*;

/// Random expressions in two variables that stay finite on [−1, 1]².
fn expr_strategy() -> impl Strategy<Value = String> {
    let leaf = prop_oneof![
        Just("x1".to_string()),
        Just("x2".to_string()),
        (-2.0f64..2.0).prop_map(|c| format!("{c:.3}")),
    ];
    leaf.prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a} + {b})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a} - {b})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a} * {b})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("{a} / (2 + ({b})^2)")),
            inner.clone().prop_map(|a| format!("sin({a})")),
            inner.clone().prop_map(|a| format!("cos({a})")),
            inner.clone().prop_map(|a| format!("exp(sin({a}))")),
            inner.clone().prop_map(|a| format!("sqrt(1 + ({a})^2)")),
            inner.clone().prop_map(|a| format!("log(3 + cos({a}))")),
            inner.clone().prop_map(|a| format!("({a})^3")),
            inner.prop_map(|a| format!("-({a})")),
        ]
    })
}

fn close(a: f64, b: f64, tol: f64, scale: f64) -> bool {
    (a - b).abs() <= tol * scale.max(1.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn expression_print_parse_round_trip(text in expr_strategy(), x in -1.0f64..1.0, y in -1.0f64..1.0) {
        let f = field(&text, 2);
        let g = field(&f.text(), 2);
        let (a, b) = (f.value(&[x, y]).unwrap(), g.value(&[x, y]).unwrap());
        prop_assert!(close(a, b, 1e-12, a.abs()), "{text}: {a} vs {b}");
    }

    #[test]
    fn jets_match_finite_differences(text in expr_strategy(), x in -0.9f64..0.9, y in -0.9f64..0.9) {
        let f = field(&text, 2);
        let p = [x, y];
        let jet = jet_eval(&f, &p, 3).unwrap();
        let h = 1e-3;
        let along = |k: usize, s: f64| {
            let mut q = p;
            q[k] += s;
            q
        };
        let scale = jet.first.iter().chain(jet.second.iter().flatten()).fold(jet.value.abs(), |m, v| m.max(v.abs()));
        for k in 0..2 {
            let fd = fd4(|s| f.value(&along(k, s)).unwrap(), 0.0, h);
            prop_assert!(close(jet.first[k], fd, 1e-6, scale), "{text} d{k}: {} vs {fd}", jet.first[k]);
            let fd2 = fd4_second(|s| f.value(&along(k, s)).unwrap(), 0.0, h);
            prop_assert!(close(jet.second[k][k], fd2, 1e-6, scale), "{text} d{k}d{k}: {} vs {fd2}", jet.second[k][k]);
            for l in 0..2 {
                // third derivatives against differences of the exact first derivatives
                let fd3 = fd4_second(|s| jet_eval(&f, &along(k, s), 1).unwrap().first[l], 0.0, h);
                let third = jet.third.as_ref().unwrap()[k][k][l];
                prop_assert!(close(third, fd3, 1e-6, scale.max(third.abs())), "{text} third: {third} vs {fd3}");
            }
        }
        let mixed = fd4(|s| jet_eval(&f, &along(1, s), 1).unwrap().first[0], 0.0, h);
        prop_assert!(close(jet.second[0][1], mixed, 1e-6, scale));
    }

    #[test]
    fn symbolic_derivative_agrees_with_jet(text in expr_strategy(), x in -1.0f64..1.0, y in -1.0f64..1.0) {
        let f = field(&text, 2);
        let jet = jet_eval(&f, &[x, y], 1).unwrap();
        for k in 0..2 {
            let d = f.derivative(k).value(&[x, y]).unwrap();
            prop_assert!(close(d, jet.first[k], 1e-10, d.abs()), "{text}: {d} vs {}", jet.first[k]);
        }
    }

    #[test]
    fn riemann_symmetries_and_bianchi(
        amp in proptest::collection::vec(-0.12f64..0.12, 6),
        freq in proptest::collection::vec(0.5f64..2.0, 6),
        x in proptest::collection::vec(-1.0f64..1.0, 3),
    ) {
        let chart = random_metric(&amp, &freq);
        let c = curvature(&chart, &x).unwrap();
        let r = |i, j, k, l| c.riemann.get(&[i, j, k, l]);
        let mut scale: f64 = 1.0;
        for v in &c.riemann.data {
            scale = scale.max(v.abs());
        }
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    for l in 0..3 {
                        let v = r(i, j, k, l);
                        prop_assert!((v + r(j, i, k, l)).abs() <= 1e-8 * scale);
                        prop_assert!((v + r(i, j, l, k)).abs() <= 1e-8 * scale);
                        prop_assert!((v - r(k, l, i, j)).abs() <= 1e-8 * scale);
                        prop_assert!((v + r(j, k, i, l) + r(k, i, j, l)).abs() <= 1e-8 * scale);
                    }
                }
            }
        }
    }

    #[test]
    fn christoffel_matches_metric_differences(
        amp in proptest::collection::vec(-0.12f64..0.12, 6),
        freq in proptest::collection::vec(0.5f64..2.0, 6),
        x in proptest::collection::vec(-1.0f64..1.0, 3),
    ) {
        let chart = random_metric(&amp, &freq);
        let gam = christoffel(&chart, &x).unwrap();
        let g = chart.metric_value(&x).unwrap();
        let gi = linalg::inverse(&g, 3).unwrap();
        let dg = |i: usize, j: usize, l: usize| {
            fd4(|s| {
                let mut q = x.clone();
                q[l] += s;
                chart.metric_value(&q).unwrap()[i][j]
            }, 0.0, 1e-3)
        };
        for k in 0..3 {
            for i in 0..3 {
                for j in 0..3 {
                    let mut v = 0.0;
                    for l in 0..3 {
                        v += 0.5 * gi[k][l] * (dg(j, l, i) + dg(i, l, j) - dg(i, j, l));
                    }
                    prop_assert!((gam.get(&[k, i, j]) - v).abs() < 1e-8);
                }
            }
        }
    }

    #[test]
    fn generalized_eigenvalue_matches_dense_oracle(
        a in proptest::collection::vec(-2.0f64..2.0, 9),
        b in proptest::collection::vec(-1.0f64..1.0, 9),
    ) {
        let n = 3;
        let mut form: M4 = linalg::ZERO;
        let mut g: M4 = linalg::ZERO;
        for i in 0..n {
            for j in 0..n {
                form[i][j] = a[i * n + j] + a[j * n + i];
                // BᵀB + I is positive definite
                let mut s = if i == j { 1.0 } else { 0.0 };
                for k in 0..n {
                    s += b[k * n + i] * b[k * n + j];
                }
                g[i][j] = s;
            }
        }
        let ours = min_generalized_eig_matrix(&form, &g, n).unwrap();
        // oracle: eigenvalues of G^{-1/2} A G^{-1/2}
        let gm = DMatrix::from_fn(n, n, |i, j| g[i][j]);
        let am = DMatrix::from_fn(n, n, |i, j| form[i][j]);
        let ge = SymmetricEigen::new(gm);
        let inv_sqrt = &ge.eigenvectors
            * DMatrix::from_diagonal(&ge.eigenvalues.map(|v| 1.0 / v.sqrt()))
            * ge.eigenvectors.transpose();
        let m = &inv_sqrt * am * &inv_sqrt;
        let oracle = SymmetricEigen::new((&m + m.transpose()) * 0.5).eigenvalues.min();
        prop_assert!((ours - oracle).abs() <= 1e-9 * oracle.abs().max(1.0), "{ours} vs {oracle}");
    }
}

/// `g = diag(1 + a sin) + small off-diagonal`, diagonally dominant.
fn random_metric(amp: &[f64], freq: &[f64]) -> MetricChart {
    let dom = CoordBox::new(vec![-2.0; 3], vec![2.0; 3]).unwrap();
    let mut comps = Vec::new();
    let mut k = 0;
    for i in 0..3 {
        for j in i..3 {
            let s = format!(
                "{} * sin({} * x{} + {} * x{})",
                amp[k],
                freq[k],
                (i + k) % 3 + 1,
                freq[(k + 1) % 6],
                (j + 1) % 3 + 1
            );
            comps.push(if i == j { format!("1 + 2 * {s}") } else { s });
            k += 1;
        }
    }
    let refs: Vec<&str> = comps.iter().map(String::as_str).collect();
    MetricChart::parse(dom, &refs).unwrap()
}

fn chart(lo: Vec<f64>, hi: Vec<f64>, diag: &[&str]) -> MetricChart {
    MetricChart::diagonal(CoordBox::new(lo, hi).unwrap(), diag).unwrap()
}

fn assert_ricci_multiple(chart: &MetricChart, points: &[Vec<f64>], k: f64, tol: f64) {
    for p in points {
        let c = curvature(chart, p).unwrap();
        let g = chart.metric_value(p).unwrap();
        let n = chart.dim();
        for i in 0..n {
            for j in 0..n {
                let want = k * g[i][j];
                let got = c.ricci.get(&[i, j]);
                assert!((got - want).abs() <= tol * want.abs().max(1.0), "{p:?} Ric[{i}][{j}] = {got}, want {want}");
            }
        }
    }
}

fn sample_points(lo: &[f64], hi: &[f64], count: usize) -> Vec<Vec<f64>> {
    (0..count as u64)
        .map(|i| {
            let q = cdglue::numerics::kronecker(i, lo.len(), 7);
            lo.iter().zip(hi).zip(q).map(|((a, b), t)| a + (b - a) * t).collect()
        })
        .collect()
}

#[test]
fn constant_curvature_ricci() {
    use std::f64::consts::PI;
    let pts = sample_points(&[0.2, 0.0], &[PI - 0.2, 2.0 * PI], 50);
    assert_ricci_multiple(&chart(vec![0.1, 0.0], vec![PI - 0.1, 2.0 * PI], &["1", "sin(x1)^2"]), &pts, 1.0, 1e-6);
    // radius 2 sphere: sectional curvature 1/4
    assert_ricci_multiple(&chart(vec![0.1, 0.0], vec![PI - 0.1, 2.0 * PI], &["4", "4*sin(x1)^2"]), &pts, 0.25, 1e-6);
    let hpts = sample_points(&[0.2, 0.0], &[2.0, 2.0 * PI], 50);
    assert_ricci_multiple(&chart(vec![0.1, 0.0], vec![2.5, 2.0 * PI], &["1", "sinh(x1)^2"]), &hpts, -1.0, 1e-6);
    let pts3 = sample_points(&[0.2, 0.2, 0.0], &[PI - 0.2, PI - 0.2, 2.0 * PI], 50);
    let s3 = chart(
        vec![0.1, 0.1, 0.0],
        vec![PI - 0.1, PI - 0.1, 2.0 * PI],
        &["1", "sin(x1)^2", "sin(x1)^2*sin(x2)^2"],
    );
    assert_ricci_multiple(&s3, &pts3, 2.0, 1e-6);
}

#[test]
fn flat_polar_charts_have_zero_curvature() {
    use std::f64::consts::PI;
    let polar = chart(vec![0.1, 0.0], vec![3.0, 2.0 * PI], &["1", "x1^2"]);
    for p in sample_points(&[0.1, 0.0], &[3.0, 2.0 * PI], 100) {
        let c = curvature(&polar, &p).unwrap();
        assert!(c.riemann.data.iter().all(|v| v.abs() < 1e-8), "{p:?}");
        assert!(c.ricci.data.iter().all(|v| v.abs() < 1e-8));
    }
    let spherical = chart(
        vec![0.1, 0.1, 0.0],
        vec![3.0, PI - 0.1, 2.0 * PI],
        &["1", "x1^2", "x1^2*sin(x2)^2"],
    );
    for p in sample_points(&[0.1, 0.1, 0.0], &[3.0, PI - 0.1, 2.0 * PI], 100) {
        let c = curvature(&spherical, &p).unwrap();
        assert!(c.ricci.data.iter().all(|v| v.abs() < 1e-8), "{p:?}");
        assert!(c.scalar.abs() < 1e-8);
    }
}

#[test]
fn hessian_of_distance_squared_is_twice_the_metric() {
    // in polar coordinates r² has Hessian 2g and Laplacian 4
    let polar = chart(vec![0.1, 0.0], vec![3.0, 6.0], &["1", "x1^2"]);
    let f: ScalarField = field("x1^2", 2);
    for p in sample_points(&[0.2, 0.0], &[2.9, 6.0], 20) {
        let hg = hessian_grad(&polar, &f, &p).unwrap();
        let g = polar.metric_value(&p).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert!((hg.hess.get(&[i, j]) - 2.0 * g[i][j]).abs() < 1e-12);
            }
        }
        assert!((hg.laplacian - 4.0).abs() < 1e-12);
        assert!((hg.gradnormsq - 4.0 * p[0] * p[0]).abs() < 1e-12);
    }
}

#[test]
fn out_of_domain_points_are_rejected() {
    let polar = chart(vec![0.1, 0.0], vec![3.0, 6.0], &["1", "x1^2"]);
    assert!(curvature(&polar, &[5.0, 1.0]).is_err());
}

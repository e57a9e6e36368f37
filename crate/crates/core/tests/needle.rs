mod common;

use std::f64::consts::PI;

use cdglue::needle::{
    disintegrate_signed_distance, fermi_density, glue_1d, kn_concavity_check, logderiv_vs_meancurv,
    needle_jump_check, pi_kappa, sigma, tau, tilted_needle_check, w2, wasserstein_1d_cd_check, Density1d,
    Measure1d, MmInterval,
};
use cdglue::numerics::kronecker;
use common::{annulus, disk, field, hemisphere, weighted_disk};
use proptest::prelude::*;

#[test]
fn doubled_disk_and_annulus_needles() {
    let nd = disintegrate_signed_distance(&disk(), &[1.0], -0.85, 0.85).unwrap();
    let na = disintegrate_signed_distance(&annulus(), &[2.0], -0.85, 0.85).unwrap();
    for i in 0..=100 {
        let t = -0.5 + i as f64 / 100.0;
        assert!((nd.eval(t).unwrap() - (1.0 - t.abs())).abs() < 1e-5);
        assert!((na.eval(t).unwrap() - (1.0 + t.abs())).abs() < 1e-5);
    }
    let rd = needle_jump_check(&nd, 0.0, 2.0, 2000, 0).unwrap();
    assert!(rd.pass && rd.jump_pass);
    let ra = needle_jump_check(&na, 0.0, 2.0, 2000, 0).unwrap();
    assert!(!ra.jump_pass && !ra.pass);
    assert!((ra.d_minus + 1.0).abs() < 1e-6 && (ra.d_plus - 1.0).abs() < 1e-6);
}

#[test]
fn disintegration_matches_fermi_density() {
    for gs in [disk(), annulus(), hemisphere(), weighted_disk()] {
        for y in [0.5, 4.0] {
            let nd = disintegrate_signed_distance(&gs, &[y], -0.85, 0.85).unwrap();
            for i in 0..40u64 {
                let t = -0.8 + 1.6 * kronecker(i, 1, 5)[0];
                let side = if t >= 0.0 { 0 } else { 1 };
                let want = fermi_density(gs.side(side), &[y], t.abs()).unwrap();
                let got = nd.eval(t).unwrap();
                assert!((got - want).abs() < 1e-8 * want.max(1.0), "t={t}: {got} vs {want}");
            }
        }
    }
}

#[test]
fn logderiv_against_mean_curvature() {
    for (gs, h) in [(disk(), 1.0), (weighted_disk(), 0.0), (hemisphere(), 0.0)] {
        for y in [0.0, 1.7, 5.0] {
            let r = logderiv_vs_meancurv(&gs, &[y]).unwrap();
            assert!(r.pass && r.deviation <= 1e-5, "{r:?}");
            assert!((r.h_phi0 - h).abs() < 1e-6 && (r.h_phi1 - h).abs() < 1e-6);
        }
    }
}

#[test]
fn tilted_needle_on_disk() {
    let gs = disk();
    for y in [0.1, 1.3, 2.5, 3.7, 4.9] {
        for b in [0.0, 0.1, 0.5] {
            let r = tilted_needle_check(&gs, &[y], &[1.0], b).unwrap();
            // Π₀+Π₁ = 2g_Y and H^{Φ₀}+H^{Φ₁} = 2 on the doubled disk
            let closed = 2.0 * b * b + 2.0 * (1.0 - b * b);
            assert!((r.closed - closed).abs() < 1e-12);
            assert!(r.pass && r.rel_deviation <= 1e-3, "{r:?}");
        }
    }
    let r = tilted_needle_check(&hemisphere(), &[1.0], &[1.0], 0.3).unwrap();
    assert!(r.pass && r.closed.abs() < 1e-12);
}

#[test]
fn tilted_needle_rejects_bad_tilt() {
    assert!(tilted_needle_check(&disk(), &[1.0], &[1.0], 1.5).is_err());
}

#[test]
fn focal_point_is_reported() {
    // the disk collar reaches its centre at depth 1
    let gs = common::doubled("(1-x2)^2", "1", 1.0, 2.0);
    assert!(disintegrate_signed_distance(&gs, &[1.0], -1.0, 1.0).is_err());
}

#[test]
fn sin_power_concavity() {
    for n in [2.5, 3.0, 4.0] {
        let phi = field(&format!("sin(x1)^{}", n - 1.0), 1);
        let mm = MmInterval::smooth(0.0, PI, phi.clone(), n - 1.0, n).unwrap();
        let r = kn_concavity_check(&mm, 4096, 0).unwrap();
        assert!(r.pass && r.max_violation <= 1e-9, "{r:?}");
        let mm = MmInterval::smooth(0.0, PI, phi, n - 1.0 + 0.1, n).unwrap();
        let r = kn_concavity_check(&mm, 4096, 0).unwrap();
        assert!(!r.pass && r.max_violation > 0.0);
        assert!(r.witness[0] != r.witness[1]);
    }
}

/// `(K,N)`-concavity over every triple of a dense grid, with its own
/// distortion coefficients.
fn dense_triple_verdict(u: impl Fn(f64) -> f64, a: f64, b: f64, k: f64, n: f64) -> bool {
    let kappa = k / (n - 1.0);
    let s = |t: f64, th: f64| -> f64 {
        if th == 0.0 {
            return t;
        }
        if kappa > 0.0 {
            let r = kappa.sqrt();
            if r * th >= PI {
                return f64::INFINITY;
            }
            (r * t * th).sin() / (r * th).sin()
        } else if kappa < 0.0 {
            let r = (-kappa).sqrt();
            (r * t * th).sinh() / (r * th).sinh()
        } else {
            t
        }
    };
    let grid: Vec<f64> = (0..=80).map(|i| a + (b - a) * i as f64 / 80.0).collect();
    let mut worst = f64::NEG_INFINITY;
    for &x0 in &grid {
        for &x1 in &grid {
            for j in 1..20 {
                let t = j as f64 / 20.0;
                let th = (x1 - x0).abs();
                let rhs = s(1.0 - t, th) * u(x0) + s(t, th) * u(x1);
                worst = worst.max(rhs - u((1.0 - t) * x0 + t * x1));
            }
        }
    }
    worst <= 1e-9
}

#[test]
fn glue_1d_matches_dense_triples() {
    let cases = [
        ("1-x1/2", "x1/2", 0.0, 1.0, 2.0, 0.0, 2.0),
        ("(1+x1)/2", "(3-x1)/2", 0.0, 1.0, 2.0, 0.0, 2.0),
        ("1+x1", "3-x1", 0.0, 1.0, 2.0, 0.0, 3.0),
        ("2-x1", "x1", 0.0, 1.0, 2.0, 0.0, 3.0),
    ];
    for (l, r, a, b, c, k, n) in cases {
        let (pl, pr) = (field(l, 1), field(r, 1));
        let report = glue_1d(&pl, &pr, a, b, c, k, n, 2000, 0).unwrap();
        let p = 1.0 / (n - 1.0);
        let u = |x: f64| {
            let v = if x < b { pl.value(&[x]).unwrap() } else { pr.value(&[x]).unwrap() };
            v.powf(p)
        };
        assert_eq!(report.pass, dense_triple_verdict(u, a, c, k, n), "{l} | {r}");
    }
}

/// Barycentres of `count` equal-mass quantile cells of `density dx` on
/// `[lo, hi]`, from cumulative mass and first-moment tables.
fn atoms(density: impl Fn(f64) -> f64, lo: f64, hi: f64, count: usize) -> Vec<f64> {
    let steps = 100_000;
    let dx = (hi - lo) / steps as f64;
    let mut mass = vec![0.0; steps + 1];
    let mut moment = vec![0.0; steps + 1];
    for i in 0..steps {
        let x = lo + dx * (i as f64 + 0.5);
        let w = density(x) * dx;
        mass[i + 1] = mass[i] + w;
        moment[i + 1] = moment[i] + w * x;
    }
    let total = mass[steps];
    // first moment up to a mass level, linear inside a slab
    let upto = |target: f64| {
        let i = mass.partition_point(|&c| c < target).clamp(1, steps) - 1;
        let frac = (target - mass[i]) / (mass[i + 1] - mass[i]);
        moment[i] + frac * (moment[i + 1] - moment[i])
    };
    let cell = total / count as f64;
    (0..count).map(|k| (upto((k + 1) as f64 * cell) - upto(k as f64 * cell)) / cell).collect()
}

/// Sorted matching of the two atom lists: the discrete optimal coupling on
/// the line.
fn discrete_w2(f0: &dyn Fn(f64) -> f64, s0: (f64, f64), f1: &dyn Fn(f64) -> f64, s1: (f64, f64), count: usize) -> f64 {
    let a = atoms(f0, s0.0, s0.1, count);
    let b = atoms(f1, s1.0, s1.1, count);
    (a.iter().zip(&b).map(|(p, q)| (p - q).powi(2)).sum::<f64>() / count as f64).sqrt()
}

#[test]
fn w2_matches_discrete_transport() {
    let mm = MmInterval::smooth(0.0, PI, field("sin(x1)^2", 1), 2.0, 3.0).unwrap();
    let m = |x: f64| x.sin().powi(2);
    let cases = [
        ("1", (0.2, 0.6), "1", (2.0, 2.5)),
        ("1+0.2*x1", (1.2, 1.8), "1", (1.0, 2.0)),
        ("1+x1", (0.3, 1.0), "exp(-x1)", (1.5, 2.8)),
        ("2+sin(5*x1)", (0.5, 2.5), "1+x1^2", (0.8, 3.0)),
    ];
    for (d0, s0, d1, s1) in cases {
        let (f0, f1) = (field(d0, 1), field(d1, 1));
        let w = w2(&mm, &Measure1d::new(s0.0, s0.1, f0.clone()), &Measure1d::new(s1.0, s1.1, f1.clone())).unwrap();
        let g0 = |x: f64| f0.value(&[x]).unwrap() * m(x);
        let g1 = |x: f64| f1.value(&[x]).unwrap() * m(x);
        let coarse = discrete_w2(&g0, s0, &g1, s1, 50);
        assert!((w - coarse).abs() <= 1e-4, "{d0} → {d1}: {w} vs {coarse}");
        let fine = discrete_w2(&g0, s0, &g1, s1, 2000);
        assert!((w - fine).abs() <= 1e-6, "{d0} → {d1}: {w} vs {fine}");
    }
}

#[test]
fn wasserstein_examples() {
    let flat = MmInterval::smooth(0.0, 1.0, field("1", 1), 0.0, 2.0).unwrap();
    let r = wasserstein_1d_cd_check(&flat, &Measure1d::block(0.05, 0.15), &Measure1d::block(0.8, 0.9), &[0.1, 0.5, 0.9]).unwrap();
    assert!(r.pass, "{r:?}");
    let round = MmInterval::smooth(0.0, PI, field("sin(x1)^2", 1), 2.0, 3.0).unwrap();
    let mu0 = Measure1d::new(0.2, 1.4, field("1 + 0.5*sin(3*x1)", 1));
    let mu1 = Measure1d::new(1.0, 2.9, field("exp(-x1)", 1));
    let r = wasserstein_1d_cd_check(&round, &mu0, &mu1, &[0.2, 0.4, 0.6, 0.8]).unwrap();
    assert!(r.pass, "{r:?}");
    let positive = MmInterval::smooth(0.0, 1.0, field("1", 1), 0.5, 2.0).unwrap();
    let r = wasserstein_1d_cd_check(&positive, &Measure1d::block(0.02, 0.1), &Measure1d::block(0.9, 0.98), &[0.5]).unwrap();
    assert!(!r.pass && r.max_violation > 0.0);
}

#[test]
fn valley_kink_fails_transport_check() {
    let mm = MmInterval::new(
        0.0,
        2.0,
        Density1d::Piecewise {
            at: 1.0,
            left: field("1-x1/2", 1),
            right: field("x1/2", 1),
        },
        0.0,
        2.0,
    )
    .unwrap();
    let r = wasserstein_1d_cd_check(&mm, &Measure1d::block(0.1, 0.3), &Measure1d::block(1.7, 1.9), &[0.5]).unwrap();
    assert!(!r.pass);
}

proptest! {
    #[test]
    fn distortion_identities(k in -3.0f64..3.0, n in 1.5f64..6.0, t in 0.0f64..1.0, frac in 0.0f64..0.99) {
        let limit = pi_kappa(k / (n - 1.0));
        let theta = if limit.is_finite() { frac * limit } else { 5.0 * frac };
        let s = sigma(k, n - 1.0, t, theta);
        let tv = tau(k, n, t, theta);
        prop_assert!((tv - t.powf(1.0 / n) * s.powf(1.0 - 1.0 / n)).abs() <= 1e-12 * tv.abs().max(1.0));
        let lim = pi_kappa(k / n);
        let th = if lim.is_finite() { frac * lim } else { 5.0 * frac };
        prop_assert!(sigma(k, n, 0.0, th).abs() < 1e-15);
        prop_assert!((sigma(k, n, 1.0, th) - 1.0).abs() < 1e-12);
    }
}

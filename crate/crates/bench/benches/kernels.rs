use std::hint::black_box;

use cdglue::curvature::bakry_emery;
use cdglue::geom_core::{curvature, jet_eval, CoordBox, MetricChart, ScalarField};
use cdglue::gluing::{deform, mollify, smoothing_sweep, SmoothingProfile, SweepConfig};
use cdglue::geom_core::MetricField;
use cdglue::needle::{disintegrate_signed_distance, kn_concavity_check, w2, Measure1d, MmInterval};
use cdglue_bench::{collar, disk_doubling, hemisphere_doubling};
use criterion::{criterion_group, criterion_main, Criterion};

fn tensors(c: &mut Criterion) {
    let f = ScalarField::parse("exp(0.3*x1) * sin(x2)^2 + x1*x2^3", 2).unwrap();
    c.bench_function("jet order 3", |b| b.iter(|| jet_eval(&f, black_box(&[0.4, 0.7]), 3).unwrap()));
    let dom = CoordBox::new(vec![0.1, 0.1, 0.0], vec![3.0, 3.0, 6.0]).unwrap();
    let s3 = MetricChart::diagonal(dom, &["1", "sin(x1)^2", "sin(x1)^2*sin(x2)^2"]).unwrap();
    c.bench_function("riemann 3d", |b| b.iter(|| curvature(&s3, black_box(&[1.0, 1.2, 2.0])).unwrap()));
    let wm = collar("(1-x2)^2", "1+x2", 0.9, 3.0);
    c.bench_function("bakry-emery 2d", |b| b.iter(|| bakry_emery(&wm, black_box(&[1.0, 0.3])).unwrap()));
}

fn smoothing(c: &mut Criterion) {
    let gs = hemisphere_doubling();
    let sm = mollify(deform(&gs, SmoothingProfile::new(0.1).unwrap()).unwrap()).unwrap();
    c.bench_function("smoothed metric jet", |b| b.iter(|| sm.metric_jet(black_box(&[1.0, 0.05])).unwrap()));
    let mut group = c.benchmark_group("sweep");
    group.sample_size(10);
    group.bench_function("hemisphere δ = 0.1", |b| {
        b.iter(|| smoothing_sweep(&gs, 2.0, 1.0, &[0.1], &SweepConfig::default()).unwrap())
    });
    group.finish();
}

fn needles(c: &mut Criterion) {
    let gs = disk_doubling();
    c.bench_function("disintegrate needle", |b| {
        b.iter(|| {
            let h = disintegrate_signed_distance(&gs, &[1.0], -0.85, 0.85).unwrap();
            h.eval(black_box(0.4)).unwrap()
        })
    });
    let mm = MmInterval::smooth(0.0, std::f64::consts::PI, ScalarField::parse("sin(x1)^2", 1).unwrap(), 2.0, 3.0).unwrap();
    c.bench_function("kn concavity 4096", |b| b.iter(|| kn_concavity_check(&mm, 4096, 0).unwrap()));
    let (mu0, mu1) = (Measure1d::block(0.2, 0.6), Measure1d::block(2.0, 2.5));
    c.bench_function("w2 quantile", |b| b.iter(|| w2(&mm, &mu0, &mu1).unwrap()));
}

criterion_group!(benches, tensors, smoothing, needles);
criterion_main!(benches);

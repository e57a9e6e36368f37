//! Validation of a scenario into core objects, and task execution.

use std::collections::BTreeMap;
use std::time::Instant;

use cdglue::curvature::{albi_check, ricci_bound_sweep, weight_concavity_check, Face, WeightedManifold};
use cdglue::geom_core::{curvature, linalg, CoordBox, MetricChart, ScalarField};
use cdglue::gluing::{
    assemble, c1_matching_check, compatibility_report, deform, smoothing_sweep, CollarGluedSpace, SweepConfig,
    SweepRow,
};
use cdglue::needle::{
    disintegrate_signed_distance, glue_1d, kn_concavity_check, logderiv_vs_meancurv, needle_jump_check,
    tilted_needle_check, wasserstein_1d_cd_check, wasserstein_block_scan, Density1d, Measure1d, MmInterval,
    NeedleJumpReport,
};
use cdglue::numerics::kronecker;
use cdglue::warp::{collapse_identity_check, warped_ricci, CollapseReport, WarpedProductSpec};
use serde::Serialize;
use serde_json::Value;

use crate::error::CliError;
use crate::report::{Report, Status, TaskError, TaskOutcome, Timing};
use crate::scenario::*;

/// Relative tolerance of the warped-product cross-checks.
pub const WARP_CHECK_TOL: f64 = 1e-6;
/// Slack on monotonicity of sweep columns.
pub const TREND_TOL: f64 = 1e-10;
/// Slack on a Ricci lower bound.
pub const BOUND_TOL: f64 = 1e-8;

/// A scenario turned into core objects.
pub struct Prepared {
    pub manifolds: BTreeMap<String, WeightedManifold>,
    pub glued: Option<CollarGluedSpace>,
    pub intervals: BTreeMap<String, MmInterval>,
}

struct Errors(Vec<String>);

impl Errors {
    fn push(&mut self, key: impl std::fmt::Display, msg: impl std::fmt::Display) {
        self.0.push(format!("{key}: {msg}"));
    }

    fn check(&mut self, ok: bool, key: impl std::fmt::Display, msg: impl std::fmt::Display) {
        if !ok {
            self.push(key, msg);
        }
    }

    fn field(&mut self, key: impl std::fmt::Display, text: &str, arity: usize) -> Option<ScalarField> {
        match ScalarField::parse(text, arity) {
            Ok(f) => Some(f),
            Err(e) => {
                self.push(key, e);
                None
            }
        }
    }
}

fn build_manifold(m: &ManifoldDef, key: &str, errs: &mut Errors) -> Option<WeightedManifold> {
    let dom = match CoordBox::new(m.lo.clone(), m.hi.clone()) {
        Ok(d) => d,
        Err(e) => {
            errs.push(format!("{key}.lo/hi"), e);
            return None;
        }
    };
    let n = dom.dim();
    let chart = match (&m.diagonal, &m.metric) {
        (Some(d), None) => {
            let s: Vec<&str> = d.iter().map(String::as_str).collect();
            MetricChart::diagonal(dom, &s).map_err(|e| errs.push(format!("{key}.diagonal"), e)).ok()?
        }
        (None, Some(c)) => {
            let s: Vec<&str> = c.iter().map(String::as_str).collect();
            MetricChart::parse(dom, &s).map_err(|e| errs.push(format!("{key}.metric"), e)).ok()?
        }
        _ => {
            errs.push(key, "exactly one of `diagonal` and `metric` is required");
            return None;
        }
    };
    let weight = errs.field(format!("{key}.weight"), &m.weight, n)?;
    let mut faces = Vec::new();
    for (i, f) in m.faces.iter().enumerate() {
        if f.coord == 0 || f.coord > n {
            errs.push(format!("{key}.faces[{i}].coord"), format!("must be in 1..={n}"));
            return None;
        }
        faces.push(Face {
            coord: f.coord - 1,
            side: f.side,
            role: f.role,
        });
    }
    WeightedManifold::new(chart, weight, m.n, faces).map_err(|e| errs.push(key, e)).ok()
}

fn build_interval(d: &IntervalDef, key: &str, errs: &mut Errors) -> Option<MmInterval> {
    let density = match (&d.density, &d.piecewise) {
        (Some(s), None) => Density1d::Field(errs.field(format!("{key}.density"), s, 1)?),
        (None, Some(p)) => {
            let left = errs.field(format!("{key}.piecewise.left"), &p.left, 1);
            let right = errs.field(format!("{key}.piecewise.right"), &p.right, 1);
            Density1d::Piecewise {
                at: p.at,
                left: left?,
                right: right?,
            }
        }
        _ => {
            errs.push(key, "exactly one of `density` and `piecewise` is required");
            return None;
        }
    };
    MmInterval::new(d.a, d.b, density, d.k, d.n).map_err(|e| errs.push(key, e)).ok()
}

fn check_points(errs: &mut Errors, key: &str, ys: &[Vec<f64>], dim: usize) {
    errs.check(!ys.is_empty(), key, "at least one point is required");
    for (i, y) in ys.iter().enumerate() {
        errs.check(y.len() == dim, format!("{key}[{i}]"), format!("expected {dim} coordinates"));
    }
}

fn check_task(t: &Task, key: &str, p: &Prepared, errs: &mut Errors) {
    let need_glued = |errs: &mut Errors| {
        errs.check(p.glued.is_some(), key, "needs a glued space (`glued = [..]`)");
        p.glued.as_ref().map(|g| g.dim() - 1)
    };
    let need_manifold = |errs: &mut Errors, name: &str| {
        errs.check(p.manifolds.contains_key(name), format!("{key}.manifold"), format!("unknown manifold `{name}`"));
    };
    let need_interval = |errs: &mut Errors, name: &str| {
        errs.check(p.intervals.contains_key(name), format!("{key}.interval"), format!("unknown interval `{name}`"));
        p.intervals.get(name)
    };
    match t {
        Task::Compatibility(c) => {
            need_glued(errs);
            errs.check(c.y_res >= 1, format!("{key}.y_res"), "must be positive");
        }
        Task::C1Matching(c) => {
            need_glued(errs);
            errs.check(c.delta > 0.0 && c.delta <= 0.5, format!("{key}.delta"), "must be in (0, 0.5]");
            errs.check(c.y_res >= 1, format!("{key}.y_res"), "must be positive");
        }
        Task::SmoothSweep(s) => {
            need_glued(errs);
            errs.check(!s.deltas.is_empty(), format!("{key}.deltas"), "at least one δ is required");
            for (i, d) in s.deltas.iter().enumerate() {
                errs.check(*d > 0.0 && *d <= 0.5, format!("{key}.deltas[{i}]"), "must be in (0, 0.5]");
            }
            errs.check(s.y_res >= 1, format!("{key}.y_res"), "must be positive");
            errs.check(s.t_res >= 2, format!("{key}.t_res"), "must be at least 2");
            errs.check(s.h_exponent >= 4.0, format!("{key}.h_exponent"), "must be at least 4");
        }
        Task::Needle(nd) => {
            if let Some(dim) = need_glued(errs) {
                check_points(errs, &format!("{key}.y"), &nd.y, dim);
            }
            errs.check(nd.t_min < 0.0 && nd.t_max > 0.0, format!("{key}.t_min/t_max"), "must straddle 0");
            errs.check(nd.n > 1.0, format!("{key}.n"), "must exceed 1");
            errs.check(nd.samples >= 16, format!("{key}.samples"), "must be at least 16");
            if let Some(r) = &nd.reference {
                errs.field(format!("{key}.reference.left"), &r.left, 1);
                errs.field(format!("{key}.reference.right"), &r.right, 1);
                errs.check(r.window > 0.0, format!("{key}.reference.window"), "must be positive");
                errs.check(r.tol > 0.0, format!("{key}.reference.tol"), "must be positive");
            }
        }
        Task::Logderiv(l) => {
            if let Some(dim) = need_glued(errs) {
                check_points(errs, &format!("{key}.y"), &l.y, dim);
            }
        }
        Task::TiltedNeedle(tn) => {
            if let Some(dim) = need_glued(errs) {
                check_points(errs, &format!("{key}.y"), &tn.y, dim);
                errs.check(tn.v.len() == dim, format!("{key}.v"), format!("expected {dim} components"));
            }
            errs.check(!tn.b.is_empty(), format!("{key}.b"), "at least one tilt is required");
            for (i, b) in tn.b.iter().enumerate() {
                errs.check(b.abs() <= 1.0, format!("{key}.b[{i}]"), "must be in [−1, 1]");
            }
        }
        Task::RicciBound(r) => {
            need_manifold(errs, &r.manifold);
            errs.check(r.resolution >= 1, format!("{key}.resolution"), "must be positive");
        }
        Task::Warp(w) => {
            need_manifold(errs, &w.manifold);
            errs.check(w.r > 0.0, format!("{key}.r"), "must be positive");
            errs.check(w.resolution >= 2, format!("{key}.resolution"), "must be at least 2");
        }
        Task::WeightConcavity(w) => {
            need_manifold(errs, &w.manifold);
            errs.check(w.resolution >= 1, format!("{key}.resolution"), "must be positive");
        }
        Task::Albi(a) => {
            need_manifold(errs, &a.manifold);
            errs.check(a.resolution >= 1, format!("{key}.resolution"), "must be positive");
        }
        Task::KnConcavity(k) => {
            need_interval(errs, &k.interval);
            errs.check(k.samples >= 16, format!("{key}.samples"), "must be at least 16");
        }
        Task::Glue1d(g) => {
            if let Some(mm) = need_interval(errs, &g.interval) {
                errs.check(
                    matches!(mm.density, Density1d::Piecewise { .. }),
                    format!("{key}.interval"),
                    "needs a piecewise density",
                );
            }
            errs.check(g.samples >= 16, format!("{key}.samples"), "must be at least 16");
        }
        Task::Wasserstein(w) => {
            need_interval(errs, &w.interval);
            for (name, m) in [("mu0", &w.mu0), ("mu1", &w.mu1)] {
                errs.field(format!("{key}.{name}.density"), &m.density, 1);
                errs.check(m.lo < m.hi, format!("{key}.{name}"), "needs lo < hi");
            }
            errs.check(!w.times.is_empty(), format!("{key}.times"), "at least one time is required");
            for (i, t) in w.times.iter().enumerate() {
                errs.check((0.0..=1.0).contains(t), format!("{key}.times[{i}]"), "must be in [0, 1]");
            }
        }
        Task::WassersteinScan(w) => {
            need_interval(errs, &w.interval);
            errs.check(w.blocks >= 2, format!("{key}.blocks"), "must be at least 2");
        }
    }
}

/// Builds every manifold, the glued space and the intervals, and checks
/// each task's parameters. All problems are reported together.
pub fn prepare(s: &Scenario) -> Result<Prepared, CliError> {
    let mut errs = Errors(Vec::new());
    errs.check(!s.name.is_empty(), "name", "must not be empty");
    errs.check(!s.tasks.is_empty(), "tasks", "at least one task is required");
    let mut manifolds = BTreeMap::new();
    for (i, m) in s.manifolds.iter().enumerate() {
        let key = format!("manifolds[{i}]");
        if manifolds.contains_key(&m.name) {
            errs.push(&key, format!("duplicate name `{}`", m.name));
        }
        if let Some(wm) = build_manifold(m, &key, &mut errs) {
            manifolds.insert(m.name.clone(), wm);
        }
    }
    let mut glued = None;
    if let Some([a, b]) = &s.glued {
        match (manifolds.get(a), manifolds.get(b)) {
            (Some(x), Some(y)) => match assemble(x.clone(), y.clone()) {
                Ok(g) => glued = Some(g),
                Err(e) => errs.push("glued", e),
            },
            _ => errs.push("glued", "names must refer to declared manifolds"),
        }
    }
    let mut intervals = BTreeMap::new();
    for (i, d) in s.intervals.iter().enumerate() {
        let key = format!("intervals[{i}]");
        if intervals.contains_key(&d.name) {
            errs.push(&key, format!("duplicate name `{}`", d.name));
        }
        if let Some(mm) = build_interval(d, &key, &mut errs) {
            intervals.insert(d.name.clone(), mm);
        }
    }
    let prepared = Prepared {
        manifolds,
        glued,
        intervals,
    };
    for (i, t) in s.tasks.iter().enumerate() {
        check_task(t, &format!("tasks[{i}]"), &prepared, &mut errs);
    }
    if errs.0.is_empty() {
        Ok(prepared)
    } else {
        Err(CliError::Validation(errs.0))
    }
}

/// What a task produced: its verdict and a JSON body.
struct Done {
    pass: bool,
    body: Value,
}

fn done<T: Serialize>(pass: bool, body: &T) -> Done {
    Done {
        pass,
        body: serde_json::to_value(body).expect("reports serialize"),
    }
}

#[derive(Serialize)]
struct SweepResult<'a> {
    rows: &'a [SweepRow],
    epsilon_nonincreasing: bool,
    epsilon_nonnegative: bool,
    distance_nonincreasing: bool,
    final_epsilon_ok: bool,
    final_distance_ok: bool,
}

#[derive(Serialize)]
struct NeedleRow {
    y: Vec<f64>,
    #[serde(flatten)]
    jump: NeedleJumpReport,
    /// Largest |h − reference| over the window.
    reference_deviation: Option<f64>,
}

#[derive(Serialize)]
struct Many<T> {
    worst: f64,
    items: Vec<T>,
}

#[derive(Serialize)]
struct WarpResult {
    fiber_dim: usize,
    collapse: CollapseReport,
    product_max_rel_error: Option<f64>,
    einstein_max_deviation: Option<f64>,
}

const REFERENCE_SAMPLES: usize = 200;

fn sweep(gs: &CollarGluedSpace, s: &SmoothSweep) -> cdglue::Result<Done> {
    let cfg = SweepConfig {
        y_res: s.y_res,
        t_res: s.t_res,
        c: s.c,
        cal: s.cal,
        f_scale: s.f_scale,
        h_exponent: s.h_exponent,
    };
    let n = s.n.unwrap_or(gs.side(0).n_synth);
    let rows = smoothing_sweep(gs, n, s.k, &s.deltas, &cfg)?;
    let mono = |f: fn(&SweepRow) -> f64| rows.windows(2).all(|w| f(&w[1]) <= f(&w[0]) + TREND_TOL);
    let last = rows.last().expect("deltas are nonempty");
    let r = SweepResult {
        rows: &rows,
        epsilon_nonincreasing: mono(|r| r.epsilon),
        epsilon_nonnegative: rows.iter().all(|r| r.epsilon >= -TREND_TOL),
        distance_nonincreasing: mono(|r| r.sup_metric_distance),
        final_epsilon_ok: s.max_final_epsilon.is_none_or(|m| last.epsilon <= m),
        final_distance_ok: s.max_final_distance.is_none_or(|m| last.sup_metric_distance <= m),
    };
    let pass = r.epsilon_nonincreasing
        && r.epsilon_nonnegative
        && r.distance_nonincreasing
        && r.final_epsilon_ok
        && r.final_distance_ok;
    Ok(done(pass, &r))
}

fn needle(gs: &CollarGluedSpace, nd: &Needle, seed: u64) -> cdglue::Result<Done> {
    let mut items = Vec::new();
    let mut pass = true;
    for y in &nd.y {
        let h = disintegrate_signed_distance(gs, y, nd.t_min, nd.t_max)?;
        let jump = needle_jump_check(&h, nd.k, nd.n, nd.samples, seed)?;
        let mut reference_deviation = None;
        if let Some(r) = &nd.reference {
            let left = ScalarField::parse(&r.left, 1)?;
            let right = ScalarField::parse(&r.right, 1)?;
            let lo = nd.t_min.max(-r.window);
            let hi = nd.t_max.min(r.window);
            let mut dev: f64 = 0.0;
            for i in 0..=REFERENCE_SAMPLES {
                let t = lo + (hi - lo) * i as f64 / REFERENCE_SAMPLES as f64;
                let want = if t < 0.0 { left.value(&[t])? } else { right.value(&[t])? };
                dev = dev.max((h.eval(t)? - want).abs());
            }
            pass &= dev <= r.tol;
            reference_deviation = Some(dev);
        }
        pass &= jump.pass;
        items.push(NeedleRow {
            y: y.clone(),
            jump,
            reference_deviation,
        });
    }
    let worst = items.iter().map(|r| r.jump.d_plus - r.jump.d_minus).fold(f64::NEG_INFINITY, f64::max);
    Ok(done(pass, &Many { worst, items }))
}

fn warp(wm: &WeightedManifold, w: &Warp, seed: u64) -> cdglue::Result<Done> {
    let spec = WarpedProductSpec::new(wm.clone(), w.r)?;
    let collapse = collapse_identity_check(&spec, w.resolution)?;
    let mut pass = collapse.pass;
    let n = wm.dim();
    let dom = wm.chart.domain();
    let mut product_max_rel_error = None;
    if w.product_points > 0 {
        let chart = spec.product_chart_1d_fiber()?;
        let mut worst: f64 = 0.0;
        for i in 0..w.product_points as u64 {
            let q = kronecker(i, 2 * n + 2, seed);
            let p: Vec<f64> = (0..n).map(|k| dom.lo[k] + (dom.hi[k] - dom.lo[k]) * q[k]).collect();
            let xi: Vec<f64> = (0..n).map(|k| 2.0 * q[n + k] - 1.0).collect();
            let v = 2.0 * q[2 * n] - 1.0;
            let mut x = p.clone();
            x.push(2.0 * std::f64::consts::PI * q[2 * n + 1]);
            let mut u = xi.clone();
            u.push(v);
            let ric = curvature(&chart, &x)?.ricci.matrix();
            let direct = linalg::quad(&ric, &u, &u, n + 1);
            let formula = warped_ricci(&spec, &p, &xi, v * v)?;
            worst = worst.max((direct - formula).abs() / direct.abs().max(1.0));
        }
        pass &= worst <= WARP_CHECK_TOL;
        product_max_rel_error = Some(worst);
    }
    let mut einstein_max_deviation = None;
    if let Some(lambda) = w.einstein {
        let mut worst: f64 = 0.0;
        for p in dom.interior_grid(w.resolution) {
            let g = wm.chart.metric_value(&p)?;
            let f = spec.f.value(&p)?;
            for k in 0..=n {
                // unit base directions and the fiber direction, then a mix
                let (xi, v2): (Vec<f64>, f64) = if k < n {
                    ((0..n).map(|j| if j == k { 1.0 } else { 0.0 }).collect(), 0.0)
                } else {
                    (vec![0.5; n], 2.0)
                };
                let len = linalg::quad(&g, &xi, &xi, n) + f * f * w.r * w.r * v2;
                let got = warped_ricci(&spec, &p, &xi, v2)?;
                worst = worst.max((got - lambda * len).abs() / len.max(1.0));
            }
            let got = warped_ricci(&spec, &p, &vec![0.0; n], 1.0)?;
            let len = f * f * w.r * w.r;
            worst = worst.max((got - lambda * len).abs() / len.max(1.0));
        }
        pass &= worst <= WARP_CHECK_TOL;
        einstein_max_deviation = Some(worst);
    }
    let r = WarpResult {
        fiber_dim: spec.m,
        collapse,
        product_max_rel_error,
        einstein_max_deviation,
    };
    Ok(done(pass, &r))
}

fn measure(m: &MeasureDef) -> cdglue::Result<Measure1d> {
    Ok(Measure1d::new(m.lo, m.hi, ScalarField::parse(&m.density, 1)?))
}

fn execute(task: &Task, p: &Prepared, seed: u64) -> cdglue::Result<Done> {
    let gs = || p.glued.as_ref().expect("validated");
    let wm = |name: &str| &p.manifolds[name];
    let mm = |name: &str| &p.intervals[name];
    match task {
        Task::Compatibility(c) => {
            let r = compatibility_report(gs(), c.y_res)?;
            Ok(done(r.pass, &r))
        }
        Task::C1Matching(c) => {
            let profile = cdglue::gluing::SmoothingProfile::new(c.delta)?;
            let r = c1_matching_check(&deform(gs(), profile)?, c.y_res)?;
            Ok(done(r.pass, &r))
        }
        Task::SmoothSweep(s) => sweep(gs(), s),
        Task::Needle(nd) => needle(gs(), nd, seed),
        Task::Logderiv(l) => {
            let items = l.y.iter().map(|y| logderiv_vs_meancurv(gs(), y)).collect::<cdglue::Result<Vec<_>>>()?;
            let pass = items.iter().all(|r| r.pass);
            let worst = items.iter().map(|r| r.deviation).fold(0.0, f64::max);
            Ok(done(pass, &Many { worst, items }))
        }
        Task::TiltedNeedle(tn) => {
            let mut items = Vec::new();
            for y in &tn.y {
                for &b in &tn.b {
                    items.push(tilted_needle_check(gs(), y, &tn.v, b)?);
                }
            }
            let pass = items.iter().all(|r| r.pass);
            let worst = items.iter().map(|r| r.rel_deviation).fold(0.0, f64::max);
            Ok(done(pass, &Many { worst, items }))
        }
        Task::RicciBound(r) => {
            let s = ricci_bound_sweep(wm(&r.manifold), r.resolution)?;
            Ok(done(s.min_eig >= r.k - BOUND_TOL, &s))
        }
        Task::Warp(w) => warp(wm(&w.manifold), w, seed),
        Task::WeightConcavity(w) => {
            let r = weight_concavity_check(wm(&w.manifold), w.kappa_bar, w.eta, w.resolution)?;
            Ok(done(r.pass, &r))
        }
        Task::Albi(a) => {
            let r = albi_check(wm(&a.manifold), a.k, a.l, a.norm, a.resolution)?;
            Ok(done(r.pass, &r))
        }
        Task::KnConcavity(k) => {
            let r = kn_concavity_check(mm(&k.interval), k.samples, seed)?;
            Ok(done(r.pass, &r))
        }
        Task::Glue1d(g) => {
            let m = mm(&g.interval);
            let Density1d::Piecewise { at, left, right } = &m.density else {
                unreachable!("validated")
            };
            let r = glue_1d(left, right, m.a, *at, m.b, m.k, m.n, g.samples, seed)?;
            Ok(done(r.pass, &r))
        }
        Task::Wasserstein(w) => {
            let r = wasserstein_1d_cd_check(mm(&w.interval), &measure(&w.mu0)?, &measure(&w.mu1)?, &w.times)?;
            Ok(done(r.pass, &r))
        }
        Task::WassersteinScan(w) => {
            let r = wasserstein_block_scan(mm(&w.interval), w.blocks)?;
            Ok(done(r.pass, &r))
        }
    }
}

/// Validates and runs every task in order. A task error is recorded and
/// later tasks still run.
pub fn run(s: &Scenario) -> Result<Report, CliError> {
    let start = Instant::now();
    let p = prepare(s)?;
    let mut tasks = Vec::new();
    let mut seconds = Vec::new();
    for (index, task) in s.tasks.iter().enumerate() {
        let t0 = Instant::now();
        let outcome = match execute(task, &p, s.seed) {
            Ok(d) => TaskOutcome {
                index,
                kind: task.kind().into(),
                status: if d.pass { Status::Pass } else { Status::Fail },
                result: Some(d.body),
                error: None,
            },
            Err(e) => TaskOutcome {
                index,
                kind: task.kind().into(),
                status: if e.is_numerical() {
                    Status::NumericalError
                } else {
                    Status::InputError
                },
                result: None,
                error: Some(TaskError::from(&e)),
            },
        };
        seconds.push(t0.elapsed().as_secs_f64());
        tasks.push(outcome);
    }
    let timing = Timing {
        total_seconds: start.elapsed().as_secs_f64(),
        task_seconds: seconds,
    };
    Ok(Report::new(s.clone(), tasks, timing))
}

//! Acceptance gate: one line per criterion, non-zero exit if any fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use frontal_core::checks;
use frontal_core::curves::{self, DirectionField, TracedCurve};
use frontal_core::extend::{extendability_test, extended_curvatures, Mode};
use frontal_core::frame::relative_normal_curvature;
use frontal_core::generators::{GeneratorKind, GeneratorSpec};
use frontal_core::parallel::{parallelly_smoothable, DEFAULT_EPS, DEFAULT_GRID, SCALES};
use frontal_core::singular::{classify_singularity, FrontType, TAU_SING};
use frontal_core::{invariant_frame, Domain, FrontalSurface, InvariantFrame};
use nalgebra::Vector2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn half() -> Domain {
    Domain::square(0.5)
}

fn spec(kind: GeneratorKind, params: &[(&str, &str)]) -> GeneratorSpec {
    params.iter().fold(GeneratorSpec::new(kind, half()), |s, (k, v)| s.with(k, v))
}

fn extendable_normal_example() -> GeneratorSpec {
    spec(
        GeneratorKind::ExtendableNormal,
        &[("b", "2/5*v^5 + v^2"), ("h", "-3*u*v / (2*(1+v^3)^3)"), ("l", "1"), ("r", "0")],
    )
}

fn cuspidal_edge() -> GeneratorSpec {
    spec(GeneratorKind::Rank1Front, &[("lambda", "v")])
}

fn rank1_general() -> GeneratorSpec {
    spec(GeneratorKind::Rank1Front, &[("lambda", "v*(2 + sin(u))"), ("f1", "u^2/2"), ("f2", "u^3/6")])
}

fn rank0_cubic() -> GeneratorSpec {
    spec(GeneratorKind::Rank0Front, &[("h", "(u^3 + v^3)/6")])
}

fn wave() -> GeneratorSpec {
    spec(GeneratorKind::ExtendableKWave, &[("c", "-1"), ("h1", "u^3/6"), ("h2", "u^3/6")])
}

fn laplace() -> GeneratorSpec {
    spec(GeneratorKind::ExtendableKLaplace, &[("c", "4"), ("F", "u^3 - 3*u*v^2")])
}

fn vanishing() -> GeneratorSpec {
    spec(GeneratorKind::VanishingK, &[("r1", "1 + u"), ("r2", "u^3/3"), ("c1", "0.5")])
}

fn graph(phi: &str) -> GeneratorSpec {
    spec(GeneratorKind::FalseSingularity, &[("immersion", "graph"), ("phi", phi), ("m1", "u^3"), ("m2", "v")])
}

fn sphere() -> GeneratorSpec {
    spec(GeneratorKind::FalseSingularity, &[("immersion", "sphere"), ("m1", "u^3"), ("m2", "v")])
}

fn canonical() -> Vec<(&'static str, GeneratorSpec)> {
    vec![
        ("extendable-normal", extendable_normal_example()),
        ("rank1-front", rank1_general()),
        ("rank1-from-h", spec(GeneratorKind::Rank1FromH, &[("h", "v^3/6 + u*v^2/2")])),
        ("vanishing-K", vanishing()),
        ("extendable-K-wave", wave()),
        ("extendable-K-laplace", laplace()),
        ("rank0-front", rank0_cubic()),
        ("false-singularity", graph("u*v")),
        ("false-singularity-sphere", sphere()),
        (
            "rank1-normalized",
            GeneratorSpec::new(GeneratorKind::Rank1Normalized, half())
                .with_spec("base", rank1_general())
                .with_number("times", 2.0),
        ),
    ]
}

fn build(spec: &GeneratorSpec) -> FrontalSurface {
    spec.build().unwrap_or_else(|e| panic!("{}: {e}", spec.kind))
}

fn grid_frames(s: &FrontalSurface, n: usize) -> Vec<InvariantFrame> {
    s.domain().grid(n, n).iter().map(|&(u, v)| invariant_frame(s, u, v).unwrap()).collect()
}

/// `n` uniformly random points with `|λ_Ω| > τ`.
fn random_regular(s: &FrontalSurface, n: usize, seed: u64) -> Vec<InvariantFrame> {
    let d = s.domain();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    for _ in 0..100 * n {
        if out.len() == n {
            break;
        }
        let (u, v) = (rng.gen_range(d.u0..=d.u1), rng.gen_range(d.v0..=d.v1));
        let f = invariant_frame(s, u, v).unwrap();
        if f.lambda.abs() > TAU_SING {
            out.push(f);
        }
    }
    assert_eq!(out.len(), n, "could not find {n} regular points");
    out
}

/// Classical `(K, H)` straight from `Dx` and `Dn`.
fn classical(f: &InvariantFrame) -> (f64, f64) {
    let first = f.dx.transpose() * f.dx;
    let second = -(f.dx.transpose() * f.dn);
    let k = second.determinant() / first.determinant();
    let h = 0.5 * (second * first.try_inverse().unwrap()).trace();
    (k, h)
}

fn classical_normal_curvature(f: &InvariantFrame, z: Vector2<f64>) -> f64 {
    let first = f.dx.transpose() * f.dx;
    let second = -(f.dx.transpose() * f.dn);
    z.dot(&(second * z)) / z.dot(&(first * z))
}

fn decomposition() -> Outcome {
    let mut worst = (0.0f64, 0.0f64);
    let mut names = Vec::new();
    for (name, sp) in canonical() {
        let frames = grid_frames(&build(&sp), 32);
        let (x, n) = checks::decomposition(&frames);
        worst = (worst.0.max(x), worst.1.max(n));
        if x > 1e-9 || n > 1e-8 {
            names.push(name);
        }
    }
    outcome(
        names.is_empty(),
        format!("max |Dx - Omega Lambda^T| = {:.2e} (<= 1e-9), max |Dn - Omega mu^T| = {:.2e} (<= 1e-8) {names:?}", worst.0, worst.1),
    )
}

fn symmetry() -> Outcome {
    let mut worst = 0.0f64;
    for (_, sp) in canonical() {
        for f in grid_frames(&build(&sp), 32) {
            worst = worst.max(checks::symmetry(&f));
        }
    }
    outcome(worst <= 1e-9, format!("max asymmetry of II_Omega adj(Lambda^T) = {worst:.2e} (<= 1e-9)"))
}

fn curvature_scaling() -> Outcome {
    let mut worst = 0.0f64;
    let mut count = 0;
    for (i, (_, sp)) in canonical().into_iter().enumerate() {
        for f in random_regular(&build(&sp), 100, 100 + i as u64) {
            let (k, h) = classical(&f);
            let tol = 1e-8 * (1.0 + f.k_omega.abs());
            let r = (f.k_omega - f.lambda * k).abs().max((f.h_omega - f.lambda * h).abs());
            worst = worst.max(r / tol);
            count += 1;
        }
    }
    outcome(worst <= 1.0, format!("{count} random regular points, worst residual / tolerance = {worst:.2e}"))
}

fn relative_curvature_scaling() -> Outcome {
    let mut worst = 0.0f64;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut count = 0;
    for (i, (_, sp)) in canonical().into_iter().enumerate() {
        for f in random_regular(&build(&sp), 100, 200 + i as u64) {
            let zeta = Vector2::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            let rel = relative_normal_curvature(&f, f.lambda_m.transpose() * zeta).unwrap();
            worst = worst.max((rel - f.lambda * classical_normal_curvature(&f, zeta)).abs());
            count += 1;
        }
    }
    outcome(worst <= 1e-8, format!("{count} random points and directions, max |k_Omega(Lambda^T z) - lambda k(z)| = {worst:.2e} (<= 1e-8)"))
}

fn example_round_trip() -> Outcome {
    let s = build(&extendable_normal_example());
    let mut worst = 0.0f64;
    for (u, v) in s.domain().grid(32, 32) {
        let x = s.eval(u, v).unwrap().x;
        let want = [u, 0.4 * v.powi(5) + v * v, u * v * v];
        for k in 0..3 {
            worst = worst.max((x[k].value() - want[k]).abs());
        }
    }
    let ext = extendability_test(&s, Mode::Analytic, 33).unwrap();
    outcome(
        worst <= 1e-8 && ext.extendable,
        format!("max coordinate error = {worst:.2e} (<= 1e-8), analytic extendable = {}", ext.extendable),
    )
}

fn classification() -> Outcome {
    let a = classify_singularity(&build(&cuspidal_edge()), 0.0, 0.0).unwrap();
    let b = classify_singularity(&build(&rank0_cubic()), 0.0, 0.0).unwrap();
    let c = classify_singularity(&build(&extendable_normal_example()), 0.0, 0.0).unwrap();
    let ok = a.front_type == FrontType::FrontRank1
        && (a.h_omega - 0.5).abs() <= 1e-9
        && b.front_type == FrontType::FrontRank0
        && (b.k_omega - 1.0).abs() <= 1e-9
        && c.front_type == FrontType::NonFrontSingularity
        && c.h_omega.abs() <= 1e-9
        && c.k_omega.abs() <= 1e-9;
    outcome(
        ok,
        format!(
            "cuspidal edge {} H={:.12}; rank-0 {} K={:.12}; example {} H={:.1e} K={:.1e}",
            a.front_type.as_str(),
            a.h_omega,
            b.front_type.as_str(),
            b.k_omega,
            c.front_type.as_str(),
            c.h_omega,
            c.k_omega
        ),
    )
}

fn wavefront_non_extendability() -> Outcome {
    let mut parts = Vec::new();
    let mut ok = true;
    for (name, sp) in [("rank1 lambda=v", cuspidal_edge()), ("rank0 cubic", rank0_cubic())] {
        let e = extendability_test(&build(&sp), Mode::Numeric, 33).unwrap();
        let finest = e.evidence.as_ref().and_then(|ev| ev.ratios.last()).map_or(0.0, |r| r.abs());
        ok &= !e.extendable && finest > 1e3;
        parts.push(format!("{name}: extendable={} finest ratio {finest:.2e}", e.extendable));
    }
    outcome(ok, parts.join("; "))
}

fn vanishing_gaussian() -> Outcome {
    let s = build(&vanishing());
    let worst = random_regular(&s, 100, 8).iter().map(|f| classical(f).0.abs()).fold(0.0, f64::max);
    outcome(worst <= 1e-8, format!("max |K| at 100 regular points = {worst:.2e} (<= 1e-8)"))
}

fn extendable_gaussian() -> Outcome {
    let mut parts = Vec::new();
    let mut ok = true;
    for (name, sp) in [("wave", wave()), ("laplace", laplace())] {
        let s = build(&sp);
        let (h, c) = sp.height().unwrap().unwrap();
        let pde = frontal_core::generators::pde_residual(&h, c, &s.domain(), 32).unwrap();
        let mut agree = 0.0f64;
        for f in random_regular(&s, 100, 9) {
            let (u, v) = f.point;
            let (ju, jv) = frontal_core::Jet2::coords(frontal_core::Order::Two, u, v);
            let hu = h(ju, jv).unwrap().du();
            let want = c / (1.0 + hu * hu + v * v).powi(2);
            agree = agree.max((classical(&f).0 - want).abs());
        }
        ok &= pde <= 1e-10 && agree <= 1e-6;
        parts.push(format!("{name}: pde {pde:.1e}, max |K - formula| {agree:.1e}"));
    }
    let k0 = extended_curvatures(&build(&wave()), 0.0, 0.0).unwrap().k;
    ok &= (k0 + 1.0).abs() <= 1e-9;
    parts.push(format!("extended K(0,0) = {k0:.12}"));
    outcome(ok, parts.join("; "))
}

fn smoothability() -> Outcome {
    let convex = spec(GeneratorKind::Rank0Front, &[("h", "(u^2 + v^2)^2/4")]);
    let cases = [
        ("lambda=v^2", spec(GeneratorKind::Rank1Front, &[("lambda", "v^2")]), true),
        ("lambda=v", cuspidal_edge(), false),
        ("convex rank-0", convex, true),
    ];
    let mut ok = SCALES == 8 && DEFAULT_EPS == 0.1;
    let mut parts = Vec::new();
    for (name, sp, want) in cases {
        let r = parallelly_smoothable(&build(&sp), (0.0, 0.0), DEFAULT_EPS, DEFAULT_GRID).unwrap();
        ok &= r.smoothable == want;
        parts.push(format!("{name}: smoothable={}", r.smoothable));
    }
    outcome(ok, parts.join("; "))
}

fn trace(f: &DirectionField, q: (f64, f64), h: f64, steps: usize) -> TracedCurve {
    let c = curves::trace_flow(f, q, h, steps, &f.chart);
    assert!(c.vertices.len() > 10, "{} trace from {q:?} stopped early: {:?}", f.kind, c.termination);
    c
}

fn crosses(c: &TracedCurve, coord: usize) -> bool {
    let vals: Vec<f64> = c.vertices.iter().map(|v| if coord == 0 { v.1 } else { v.2 }).collect();
    vals.iter().any(|&x| x < 0.0) && vals.iter().any(|&x| x > 0.0)
}

struct CurveRun {
    surface: FrontalSurface,
    pair: (DirectionField, DirectionField),
    traces: Vec<(usize, TracedCurve)>,
}

fn saddle_run() -> CurveRun {
    let s = build(&graph("u*v"));
    let pair = curves::asymptotic_fields(&s, (0.0, 0.0)).unwrap();
    let mut traces = Vec::new();
    for q in [(-0.3, -0.4), (-0.4, 0.2), (0.2, -0.3)] {
        traces.push((0, trace(&pair.0, q, 0.002, 300)));
        traces.push((1, trace(&pair.1, q, 0.002, 300)));
    }
    CurveRun { surface: s, pair, traces }
}

fn wave_run() -> CurveRun {
    let s = build(&wave());
    let pair = curves::asymptotic_fields_front_k(&s).unwrap();
    let mut traces = Vec::new();
    for q in [(0.2, -0.3), (-0.2, -0.3), (0.0, -0.1)] {
        traces.push((0, trace(&pair.0, q, 0.001, 500)));
        traces.push((1, trace(&pair.1, q, 0.001, 500)));
    }
    CurveRun { surface: s, pair, traces }
}

fn ellipsoid_run() -> CurveRun {
    let s = build(&graph("u^2 + 2*v^2"));
    let pair = curves::curvature_line_fields(&s, (0.0, 0.0)).unwrap();
    let mut traces = Vec::new();
    for q in [(-0.1, 0.05), (-0.1, -0.08), (0.05, -0.1)] {
        traces.push((0, trace(&pair.0, q, 0.001, 200)));
        traces.push((1, trace(&pair.1, q, 0.001, 200)));
    }
    CurveRun { surface: s, pair, traces }
}

fn curve_suites() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();

    for (name, run, axis) in [("saddle", saddle_run(), 0), ("wave", wave_run(), 1)] {
        let worst = run
            .traces
            .iter()
            .map(|(_, c)| curves::g_asymptotic_residual(&run.surface, c).unwrap())
            .fold(0.0, f64::max);
        let crossing = run.traces.iter().any(|(_, c)| crosses(c, axis));
        ok &= worst <= 1e-6 && crossing;
        parts.push(format!("{name} G-residual {worst:.1e} crossing={crossing}"));
    }

    let run = ellipsoid_run();
    let (mut line, mut gauss) = (0.0f64, 0.0f64);
    for (i, c) in &run.traces {
        let f = if *i == 0 { &run.pair.0 } else { &run.pair.1 };
        line = line.max(curves::line_of_curvature_residual(&run.surface, c).unwrap());
        gauss = gauss.max(curves::gaussian_line_residual(&run.surface, f, c).unwrap());
    }
    let crossing = run.traces.iter().any(|(_, c)| crosses(c, 0));
    ok &= line <= 1e-6 && gauss <= 1e-6 && crossing;
    parts.push(format!("curvature lines {line:.1e}, Gaussian identity {gauss:.1e}, crossing={crossing}"));

    let bounded = build(&spec(GeneratorKind::Rank1Front, &[("lambda", "v*(2 + sin(u))")]));
    let max_k = random_regular(&bounded, 200, 11).iter().map(|f| classical(f).0.abs()).fold(0.0, f64::max);
    let along = DirectionField::custom("singular line", bounded.domain(), |_, _| Ok(Vector2::new(1.0, 0.0)));
    let on_sigma = trace(&along, (-0.45, 0.0), 0.01, 90);
    let sigma = curves::g_asymptotic_residual(&bounded, &on_sigma).unwrap();
    ok &= max_k < 1e3 && sigma <= 1e-6;
    parts.push(format!("bounded K ({max_k:.1e}) singular line {sigma:.1e}"));

    let saddle = build(&graph("u*v"));
    let diagonal = DirectionField::custom("diagonal", saddle.domain(), |_, _| Ok(Vector2::new(1.0, 1.0)));
    let neg_a = curves::g_asymptotic_residual(&saddle, &trace(&diagonal, (0.1, -0.3), 0.01, 30)).unwrap();
    let ellipsoid = build(&graph("u^2 + 2*v^2"));
    let diagonal = DirectionField::custom("diagonal", ellipsoid.domain(), |_, _| Ok(Vector2::new(1.0, 1.0)));
    let neg_b = curves::line_of_curvature_residual(&ellipsoid, &trace(&diagonal, (0.1, -0.3), 0.01, 30)).unwrap();
    ok &= neg_a > 1e-3 && neg_b > 1e-3;
    parts.push(format!("controls {neg_a:.1e}, {neg_b:.1e} (> 1e-3)"));
    outcome(ok, parts.join("; "))
}

fn independence() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for (name, run) in [("saddle", saddle_run()), ("wave", wave_run()), ("curvature lines", ellipsoid_run())] {
        let points: Vec<(f64, f64)> = run.traces.iter().flat_map(|(_, c)| c.points().collect::<Vec<_>>()).collect();
        let d = curves::min_independence(&run.surface, &run.pair.0, &run.pair.1, &points).unwrap();
        let d = d.unwrap_or(0.0);
        ok &= d > 1e-10;
        parts.push(format!("{name}: min |det| {d:.2e} over {} points", points.len()));
    }
    outcome(ok, parts.join("; "))
}

fn integrator_order() -> Outcome {
    let d = Domain::square(10.0);
    let f = DirectionField::custom("nonlinear", d, |u, v| Ok(Vector2::new(1.0 + v.sin(), u * v)));
    let end = |h: f64| {
        let steps = (1.0 / h).round() as usize;
        let c = curves::trace_flow(&f, (0.0, 0.5), h, steps, &d);
        let &(_, u, v) = c.vertices.last().unwrap();
        Vector2::new(u, v)
    };
    let hs = [0.1, 0.05, 0.025];
    let reference = end(hs[2] / 16.0);
    let errs: Vec<f64> = hs.iter().map(|&h| (end(h) - reference).norm()).collect();
    let ratios: Vec<f64> = errs.windows(2).map(|w| w[0] / w[1]).collect();
    let ok = ratios.iter().all(|r| (12.0..=20.0).contains(r));
    let fmt = |xs: &[f64], p: &str| xs.iter().map(|x| if p == "e" { format!("{x:.2e}") } else { format!("{x:.2}") }).collect::<Vec<_>>().join(", ");
    outcome(ok, format!("errors [{}], ratios [{}] (within [12, 20])", fmt(&errs, "e"), fmt(&ratios, "f")))
}

fn config_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn cli_determinism() -> Outcome {
    let bin = env!("CARGO_BIN_EXE_frontal-lab");
    let mut parts = Vec::new();
    let mut ok = true;
    for name in ["cuspidal-edge.json", "saddle.json"] {
        let cfg = config_dir().join(name);
        let mut reports = Vec::new();
        for _ in 0..2 {
            let dir = tempfile::tempdir().unwrap();
            let status = Command::new(bin).arg("run").arg(&cfg).arg("--out").arg(dir.path()).output().unwrap();
            assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
            reports.push(std::fs::read(dir.path().join("report.json")).unwrap());
        }
        let same = reports[0] == reports[1];
        ok &= same;
        parts.push(format!("{name}: {} bytes, identical={same}", reports[0].len()));
    }
    outcome(ok, parts.join("; "))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 14] = [
        ("decomposition", decomposition),
        ("shape operator symmetry", symmetry),
        ("curvature scaling", curvature_scaling),
        ("relative normal curvature scaling", relative_curvature_scaling),
        ("extendable-normal round trip", example_round_trip),
        ("front classification", classification),
        ("wavefront non-extendability", wavefront_non_extendability),
        ("vanishing Gaussian curvature", vanishing_gaussian),
        ("extendable Gaussian curvature", extendable_gaussian),
        ("parallel smoothability", smoothability),
        ("curve suites", curve_suites),
        ("field independence", independence),
        ("integrator order", integrator_order),
        ("cli determinism", cli_determinism),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            outcome(false, format!("panicked: {msg}"))
        });
        failed += !result.pass as usize;
        println!(
            "criterion {:>2} {} {name} ({:.1}s): {}",
            i + 1,
            if result.pass { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64(),
            result.detail
        );
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}

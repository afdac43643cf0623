//! The `run`, `verify` and `eval` commands.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use frontal_core::checks::{invariant_suite, Check, GRID};
use frontal_core::curves::{self, DirectionField, FieldKind, TracedCurve};
use frontal_core::expr::Expr;
use frontal_core::extend::{extendability_test, extended_curvatures, Mode};
use frontal_core::frame::invariant_frame;
use frontal_core::parallel::{parallelly_smoothable, DEFAULT_GRID as SMOOTH_GRID};
use frontal_core::singular::{check_proper, classify_singularity, singular_set, MIN_GRID};
use frontal_core::{Error, FrontalSurface, InvariantFrame, Jet2, Order};
use rayon::prelude::*;
use serde_json::{json, Map, Value};

use crate::config::{Output, RunConfig};
use crate::error::{CliError, CliResult};
use crate::format::{cell, float, to_json, to_json_line};

pub const SCHEMA_VERSION: u32 = 1;

/// Everything a run produces, before anything touches the disk.
#[derive(Debug, Clone, Default)]
pub struct Artifacts {
    pub report: Value,
    pub mesh: Option<String>,
    pub fields: Option<String>,
    pub singular: Option<String>,
    pub curves: Option<String>,
}

impl Artifacts {
    pub fn files(&self) -> Vec<(&'static str, String)> {
        let mut out = Vec::new();
        for (name, body) in [
            ("surface.obj", &self.mesh),
            ("fields.csv", &self.fields),
            ("singular.csv", &self.singular),
            ("curves.jsonl", &self.curves),
        ] {
            if let Some(b) = body {
                out.push((name, b.clone()));
            }
        }
        out.push(("report.json", to_json(&self.report)));
        out
    }

    pub fn write(&self, dir: &Path) -> CliResult<Vec<PathBuf>> {
        std::fs::create_dir_all(dir).map_err(|source| CliError::Io { path: dir.to_path_buf(), source })?;
        let mut written = Vec::new();
        for (name, body) in self.files() {
            let path = dir.join(name);
            std::fs::write(&path, body).map_err(|source| CliError::Io { path: path.clone(), source })?;
            written.push(path);
        }
        Ok(written)
    }
}

pub fn run(config: &Path, out: &Path) -> CliResult<Vec<PathBuf>> {
    let cfg = RunConfig::load(config)?;
    execute(&cfg)?.write(out)
}

fn grid_frames(s: &FrontalSurface, n: usize, m: usize) -> CliResult<Vec<InvariantFrame>> {
    Ok(s.domain().grid(n, m).par_iter().map(|&(u, v)| invariant_frame(s, u, v)).collect::<Result<_, _>>()?)
}

fn obj(kind: &str, frames: &[InvariantFrame], n: usize, m: usize) -> String {
    let mut out = format!("# {kind}, {n} x {m} grid\n");
    for f in frames {
        let _ = writeln!(out, "v {} {} {}", float(f.x[0]), float(f.x[1]), float(f.x[2]));
    }
    for j in 0..m - 1 {
        for i in 0..n - 1 {
            let a = j * n + i + 1;
            let (b, c, d) = (a + 1, a + n + 1, a + n);
            let _ = writeln!(out, "f {a} {b} {c}");
            let _ = writeln!(out, "f {a} {c} {d}");
        }
    }
    out
}

fn fields_csv(frames: &[InvariantFrame]) -> (String, usize) {
    let mut out = String::from("u,v,lambda_omega,K_omega,H_omega,k1_omega,k2_omega,K,H\n");
    let mut regular = 0;
    for f in frames {
        let classical = f.classical();
        regular += classical.is_some() as usize;
        let row = [
            Some(f.point.0),
            Some(f.point.1),
            Some(f.lambda),
            Some(f.k_omega),
            Some(f.h_omega),
            f.principal.map(|p| p.0),
            f.principal.map(|p| p.1),
            classical.map(|c| c.0),
            classical.map(|c| c.1),
        ];
        let cells: Vec<String> = row.into_iter().map(cell).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    (out, regular)
}

fn require_grid(what: &str, n: usize, m: usize) -> CliResult<()> {
    if n < MIN_GRID || m < MIN_GRID {
        return Err(CliError::Validation(format!("{what} needs a grid of at least {MIN_GRID}x{MIN_GRID}, got {n}x{m}")));
    }
    Ok(())
}

fn fields_for(s: &FrontalSurface, kind: FieldKind, center: (f64, f64)) -> CliResult<DirectionField> {
    let (a, b) = if kind.is_asymptotic() {
        if s.kind() == "extendable-K-wave" {
            curves::asymptotic_fields_front_k(s)?
        } else {
            curves::asymptotic_fields(s, center)?
        }
    } else {
        curves::curvature_line_fields(s, center)?
    };
    Ok(if matches!(kind, FieldKind::Asymptotic1 | FieldKind::CurvatureLine1) { a } else { b })
}

fn curve_json(c: &TracedCurve, seed: [f64; 2], field: &DirectionField) -> Value {
    json!({
        "field": c.kind.as_str(),
        "provenance": field.provenance,
        "seed": seed,
        "termination": c.termination.as_str(),
        "vertices": c.vertices.iter().map(|&(t, u, v)| json!([t, u, v])).collect::<Vec<_>>(),
        "velocities": c.velocities.iter().map(|&(a, b)| json!([a, b])).collect::<Vec<_>>(),
        "residuals": c.residuals,
    })
}

fn trace(
    s: &FrontalSurface,
    field: &str,
    seeds: &[[f64; 2]],
    step: f64,
    steps: usize,
    center: (f64, f64),
    lines: &mut Vec<String>,
) -> CliResult<Value> {
    let kind = FieldKind::parse(field).ok_or_else(|| CliError::Validation(format!("unknown field kind `{field}`")))?;
    let f = fields_for(s, kind, center)?;
    let traced: Vec<(TracedCurve, Option<f64>)> = seeds
        .par_iter()
        .map(|q| {
            let mut c = curves::trace_flow(&f, (q[0], q[1]), step, steps, &f.chart);
            curves::attach_residuals(s, &mut c)?;
            let gauss = if kind.is_curvature_line() { Some(curves::gaussian_line_residual(s, &f, &c)?) } else { None };
            Ok((c, gauss))
        })
        .collect::<Result<_, Error>>()?;
    let mut summary = Vec::new();
    for ((c, gauss), seed) in traced.iter().zip(seeds) {
        lines.push(to_json_line(&curve_json(c, *seed, &f)));
        let mut entry = json!({
            "seed": seed,
            "vertices": c.vertices.len(),
            "termination": c.termination.as_str(),
            "max_residual": c.max_residual(),
        });
        if let Some(g) = gauss {
            entry["max_gaussian_line_residual"] = json!(g);
        }
        summary.push(entry);
    }
    Ok(json!({
        "field": kind.as_str(),
        "provenance": f.provenance,
        "chart": f.chart,
        "step": step,
        "steps": steps,
        "curves": summary,
    }))
}

/// Computes every requested output for `cfg`.
pub fn execute(cfg: &RunConfig) -> CliResult<Artifacts> {
    let s = cfg.surface()?;
    let [n, m] = cfg.grid;
    let d = s.domain();
    let mut art = Artifacts::default();
    let mut results = Vec::new();
    let mut frames: Option<Vec<InvariantFrame>> = None;
    let mut curve_lines = Vec::new();

    for out in &cfg.outputs {
        let mut block = Map::new();
        block.insert("type".into(), json!(out.name()));
        match out {
            Output::Mesh | Output::Fields => {
                if frames.is_none() {
                    frames = Some(grid_frames(&s, n, m)?);
                }
                let fr = frames.as_deref().expect("computed above");
                if matches!(out, Output::Mesh) {
                    art.mesh = Some(obj(s.kind(), fr, n, m));
                    block.insert("file".into(), json!("surface.obj"));
                    block.insert("vertices".into(), json!(n * m));
                    block.insert("faces".into(), json!(2 * (n - 1) * (m - 1)));
                } else {
                    let (csv, regular) = fields_csv(fr);
                    art.fields = Some(csv);
                    block.insert("file".into(), json!("fields.csv"));
                    block.insert("rows".into(), json!(fr.len()));
                    block.insert("regular_points".into(), json!(regular));
                }
            }
            Output::SingularSet => {
                require_grid("singular-set", n, m)?;
                let proper = match check_proper(&s, n.min(m)) {
                    Ok(()) => true,
                    Err(Error::NotProperFrontal(_)) => false,
                    Err(e) => return Err(e.into()),
                };
                let curves = singular_set(&s, n, m)?;
                let mut csv = String::from("curve,closed,index,u,v\n");
                for (k, c) in curves.iter().enumerate() {
                    for (i, &(u, v)) in c.points.iter().enumerate() {
                        let _ = writeln!(csv, "{k},{},{i},{},{}", c.closed, float(u), float(v));
                    }
                }
                art.singular = Some(csv);
                block.insert("file".into(), json!("singular.csv"));
                block.insert("proper".into(), json!(proper));
                block.insert(
                    "curves".into(),
                    json!(curves.iter().map(|c| json!({"points": c.points.len(), "closed": c.closed})).collect::<Vec<_>>()),
                );
            }
            Output::Classify { points } => {
                let mut rows = Vec::new();
                for p in points {
                    let r = classify_singularity(&s, p[0], p[1])?;
                    let mut row = serde_json::to_value(r).expect("report serializes");
                    row["extended"] = match extended_curvatures(&s, p[0], p[1]) {
                        Ok(e) => serde_json::to_value(e).expect("curvatures serialize"),
                        Err(e) => json!({"error": e.to_string()}),
                    };
                    rows.push(row);
                }
                block.insert("points".into(), json!(rows));
            }
            Output::Extendability { mode } => {
                require_grid("extendability", n, m)?;
                let mode = mode.unwrap_or(if s.has_c_field() { Mode::Analytic } else { Mode::Numeric });
                block.insert("mode".into(), json!(mode.as_str()));
                match extendability_test(&s, mode, n.min(m) | 1) {
                    Ok(e) => {
                        let verdict = if e.extendable { "extendable" } else { "non-extendable" };
                        block.insert("verdict".into(), json!(verdict));
                        block.insert("details".into(), serde_json::to_value(e).expect("verdict serializes"));
                    }
                    Err(Error::NotExtendable(reason)) => {
                        block.insert("verdict".into(), json!("non-extendable"));
                        block.insert("reason".into(), json!(reason));
                    }
                    Err(e) => return Err(e.into()),
                }
            }
            Output::Trace { field, seeds, step, steps, center } => {
                let c = center.map_or(d.center(), |c| (c[0], c[1]));
                let v = trace(&s, field, seeds, *step, *steps, c, &mut curve_lines)?;
                block.extend(v.as_object().expect("trace block is an object").clone());
            }
            Output::Smoothable { point, eps } => {
                let r = parallelly_smoothable(&s, (point[0], point[1]), *eps, SMOOTH_GRID)?;
                block.insert("result".into(), serde_json::to_value(r).expect("verdict serializes"));
            }
        }
        results.push(Value::Object(block));
    }
    if !curve_lines.is_empty() {
        art.curves = Some(curve_lines.join("\n") + "\n");
    }
    let prov = s.provenance();
    art.report = json!({
        "schema_version": SCHEMA_VERSION,
        "tool": {"name": "frontal-lab", "version": env!("CARGO_PKG_VERSION")},
        "config": serde_json::to_value(cfg).expect("config serializes"),
        "surface": {
            "kind": prov.kind,
            "params": prov.params.iter().map(|(k, v)| json!([k, v])).collect::<Vec<_>>(),
            "domain": d,
        },
        "results": results,
    });
    Ok(art)
}

/// Runs the invariant suite for the configured surface.
pub fn verify_config(cfg: &RunConfig) -> CliResult<Vec<Check>> {
    let s = cfg.surface()?;
    let height = if cfg.tmb_override.is_none() { cfg.generator.height()? } else { None };
    Ok(invariant_suite(&s, height.as_ref(), GRID)?)
}

pub fn render_checks(checks: &[Check]) -> String {
    let mut out = String::new();
    for c in checks {
        let op = match c.bound {
            frontal_core::checks::Bound::AtMost => "<=",
            frontal_core::checks::Bound::Above => ">",
        };
        let _ = writeln!(
            out,
            "{} {:<32} {:.3e} {op} {:.0e} ({} samples)",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.value,
            c.tolerance,
            c.samples
        );
    }
    out
}

/// The rendered check table and the number of failed identities.
pub fn verify(config: &Path) -> CliResult<(String, usize)> {
    let cfg = RunConfig::load(config)?;
    let checks = verify_config(&cfg)?;
    Ok((render_checks(&checks), checks.iter().filter(|c| !c.passed).count()))
}

/// Value and partial derivatives of an expression at a point.
pub fn eval(expr: &str, at: (f64, f64), order: u8) -> CliResult<String> {
    let e = Expr::parse(expr).map_err(|err| CliError::Validation(format!("{err}\n  {expr}\n  {:>w$}", "^", w = err.offset() + 1)))?;
    let ord = match order {
        1 => Order::One,
        2 => Order::Two,
        o => return Err(CliError::Validation(format!("order must be 1 or 2, got {o}"))),
    };
    let (u, v) = Jet2::coords(ord, at.0, at.1);
    let j = e.eval_jet(u, v)?;
    let mut out = format!("f = {e}\nvalue = {}\nf_u = {}\nf_v = {}\n", float(j.value()), float(j.du()), float(j.dv()));
    if ord == Order::Two {
        let _ = write!(out, "f_uu = {}\nf_uv = {}\nf_vv = {}\n", float(j.duu()), float(j.duv()), float(j.dvv()));
    }
    Ok(out)
}

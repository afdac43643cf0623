//! Named identity checks run on a configured surface.

use nalgebra::{Matrix2, Vector2};
use rayon::prelude::*;
use serde::Serialize;

use crate::curves::{self, DirectionField, TracedCurve};
use crate::error::{Error, Result};
use crate::extend::{extendability_test, Mode};
use crate::frame::{normal_curvature, principal_directions, relative_normal_curvature, InvariantFrame};
use crate::generators::{pde_residual, Scalar2};
use crate::linalg::inf_norm2;
use crate::singular::{self, classify_singularity, TAU_SING};
use crate::surface::{FrontalSurface, SurfacePoint};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Bound {
    AtMost,
    Above,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub bound: Bound,
    pub samples: usize,
    pub passed: bool,
}

impl Check {
    pub fn at_most(name: &str, value: f64, tolerance: f64, samples: usize) -> Self {
        Check { name: name.into(), value, tolerance, bound: Bound::AtMost, samples, passed: value <= tolerance }
    }

    pub fn above(name: &str, value: f64, tolerance: f64, samples: usize) -> Self {
        Check { name: name.into(), value, tolerance, bound: Bound::Above, samples, passed: value > tolerance }
    }
}

pub const GRID: usize = 32;
const BASIS_CHANGE: Matrix2<f64> = Matrix2::new(1.25, 0.5, -0.25, 0.75);
const ZETAS: [(f64, f64); 4] = [(1.0, 0.0), (0.0, 1.0), (1.0, 1.0), (1.0, -2.0)];
const TRACE_STEPS: usize = 100;

/// Largest value and number of contributing samples.
#[derive(Debug, Clone, Copy, Default)]
struct Max {
    value: f64,
    count: usize,
}

impl Max {
    fn add(&mut self, x: f64) {
        self.value = if x.is_nan() { f64::INFINITY } else { self.value.max(x) };
        self.count += 1;
    }
}

fn regular(f: &InvariantFrame) -> bool {
    f.lambda.abs() > TAU_SING
}

pub fn decomposition(frames: &[InvariantFrame]) -> (f64, f64) {
    frames.iter().fold((0.0f64, 0.0f64), |(a, b), f| {
        let (x, n) = f.decomposition_residuals();
        (a.max(x), b.max(n))
    })
}

pub fn symmetry(f: &InvariantFrame) -> f64 {
    let s = f.shape();
    inf_norm2(&(s - s.transpose()))
}

/// `|K_Ω - λ K|` and `|H_Ω - λ H|`, both over `1 + |K_Ω|`; `None` at singular points.
pub fn scaling(f: &InvariantFrame) -> Option<(f64, f64)> {
    let (k, h) = f.classical()?;
    let scale = 1.0 + f.k_omega.abs();
    Some(((f.k_omega - f.lambda * k).abs() / scale, (f.h_omega - f.lambda * h).abs() / scale))
}

/// `|k^Ω(Λ^T ζ) - λ k(ζ)|` relative to `1 + |λ k(ζ)|`.
pub fn relative_scaling(f: &InvariantFrame, zeta: Vector2<f64>) -> Result<f64> {
    let rel = relative_normal_curvature(f, f.lambda_m.transpose() * zeta)?;
    let k = f.lambda * normal_curvature(f, zeta)?;
    Ok((rel - k).abs() / (1.0 + k.abs()))
}

/// `Dg^T D(a, b)` antisymmetric part, for a basis of the form `(1, 0, g1), (0, 1, g2)`.
fn compatibility(p: &SurfacePoint) -> Option<f64> {
    let w = &p.omega;
    let top = [w[0][0], w[0][1], w[1][0], w[1][1]];
    let graph_form = top.iter().zip([1.0, 0.0, 0.0, 1.0]).all(|(j, e)| {
        j.value() == e && j.du() == 0.0 && j.dv() == 0.0
    });
    if !graph_form {
        return None;
    }
    let dab = Matrix2::new(p.x[0].du(), p.x[0].dv(), p.x[1].du(), p.x[1].dv());
    let dg = Matrix2::new(w[0][2].du(), w[0][2].dv(), w[1][2].du(), w[1][2].dv());
    let m = dab.transpose() * dg;
    Some((m[(0, 1)] - m[(1, 0)]).abs())
}

fn frames_and_points(s: &FrontalSurface, n: usize) -> Result<Vec<(SurfacePoint, InvariantFrame)>> {
    s.domain()
        .grid(n, n)
        .par_iter()
        .map(|&(u, v)| {
            let p = s.eval(u, v)?;
            let f = InvariantFrame::from_point(&p, u, v)?;
            Ok((p, f))
        })
        .collect()
}

fn seeds(field: &DirectionField) -> Vec<(f64, f64)> {
    let c = field.chart.center();
    let (du, dv) = (0.25 * (field.chart.u1 - field.chart.u0), 0.25 * (field.chart.v1 - field.chart.v0));
    vec![c, (c.0 + du, c.1 + 0.5 * dv), (c.0 - du, c.1 - 0.5 * dv), (c.0 + 0.5 * du, c.1 - dv)]
}

fn trace_all(field: &DirectionField) -> Vec<TracedCurve> {
    let h = field.chart.extent() / (2.0 * TRACE_STEPS as f64);
    seeds(field)
        .par_iter()
        .map(|&q| curves::trace_flow(field, q, h, TRACE_STEPS, &field.chart))
        .collect()
}

fn curve_checks(s: &FrontalSurface, out: &mut Vec<Check>) -> Result<()> {
    let center = s.domain().center();
    let mut asymptotic = Vec::new();
    if s.kind() == "extendable-K-wave" {
        asymptotic.push(("wave-asymptotic", curves::asymptotic_fields_front_k(s)?));
    }
    if s.has_c_field() {
        match curves::asymptotic_fields(s, center) {
            Ok(pair) => asymptotic.push(("asymptotic", pair)),
            Err(Error::NonNegativeCurvature { .. } | Error::BranchUndetermined(_)) => {}
            Err(e) => return Err(e),
        }
    }
    for (label, (a, b)) in &asymptotic {
        let mut worst = Max::default();
        for f in [a, b] {
            for c in trace_all(f) {
                worst.add(curves::g_asymptotic_residual(s, &c)?);
            }
        }
        out.push(Check::at_most(&format!("{label}-g-residual"), worst.value, 1e-6, worst.count));
        if let Some(d) = curves::min_independence(s, a, b, &seeds(a))? {
            out.push(Check::above(&format!("{label}-independence"), d, 1e-10, 4));
        }
    }
    if s.has_c_field() {
        match curves::curvature_line_fields(s, center) {
            Ok((a, b)) => {
                let (mut line, mut gauss) = (Max::default(), Max::default());
                for f in [&a, &b] {
                    for c in trace_all(f) {
                        line.add(curves::line_of_curvature_residual(s, &c)?);
                        gauss.add(curves::gaussian_line_residual(s, f, &c)?);
                    }
                }
                out.push(Check::at_most("line-of-curvature-residual", line.value, 1e-6, line.count));
                out.push(Check::at_most("gaussian-line-identity", gauss.value, 1e-6, gauss.count));
                if let Some(d) = curves::min_independence(s, &a, &b, &seeds(&a))? {
                    out.push(Check::above("curvature-line-independence", d, 1e-10, 4));
                }
            }
            Err(Error::UmbilicChart { .. } | Error::BranchUndetermined(_)) => {}
            Err(e) => return Err(e),
        }
    }
    Ok(())
}

/// Runs every identity that applies to `s`. `height` is `(h, c)` for extendable-K surfaces.
pub fn invariant_suite(s: &FrontalSurface, height: Option<&(Scalar2, f64)>, n: usize) -> Result<Vec<Check>> {
    let data = frames_and_points(s, n)?;
    let frames: Vec<InvariantFrame> = data.iter().map(|(_, f)| f.clone()).collect();
    let total = frames.len();
    let mut out = Vec::new();

    let (dx, dn) = decomposition(&frames);
    out.push(Check::at_most("decomposition-x", dx, 1e-9, total));
    out.push(Check::at_most("decomposition-n", dn, 1e-8, total));
    let sym = frames.iter().map(symmetry).fold(0.0, f64::max);
    out.push(Check::at_most("symmetry", sym, 1e-9, total));

    let (mut sk, mut sh, mut rel) = (Max::default(), Max::default(), Max::default());
    for f in frames.iter().filter(|f| regular(f)) {
        if let Some((a, b)) = scaling(f) {
            sk.add(a);
            sh.add(b);
        }
        for z in ZETAS {
            rel.add(relative_scaling(f, Vector2::new(z.0, z.1))?);
        }
    }
    out.push(Check::at_most("scaling-K", sk.value, 1e-8, sk.count));
    out.push(Check::at_most("scaling-H", sh.value, 1e-8, sh.count));
    out.push(Check::at_most("relative-curvature-scaling", rel.value, 1e-8, rel.count));

    let m = BASIS_CHANGE;
    let minv = m.try_inverse().expect("fixed basis change is invertible");
    let det = m.determinant();
    let rebased = s.rebased(m)?;
    let coarse = s.domain().grid(8, 8);
    let pairs: Vec<(InvariantFrame, InvariantFrame)> = coarse
        .par_iter()
        .map(|&(u, v)| Ok((crate::frame::invariant_frame(s, u, v)?, crate::frame::invariant_frame(&rebased, u, v)?)))
        .collect::<Result<_>>()?;
    let (mut basis, mut dirs) = (Max::default(), Max::default());
    for (f, g) in &pairs {
        let scale = 1.0 + f.k_omega.abs() + f.h_omega.abs();
        basis.add((g.k_omega - f.k_omega / det).abs().max((g.h_omega - f.h_omega / det).abs()) / scale);
        if let (Ok(p), Ok(q)) = (principal_directions(f), principal_directions(g)) {
            if (p.k2 - p.k1).abs() > 1e-6 {
                for (w, wh) in [(p.w1, q.w1), (p.w2, q.w2)] {
                    let mapped = minv * w;
                    let sin = Matrix2::from_columns(&[mapped, wh]).determinant() / (mapped.norm() * wh.norm());
                    dirs.add(sin.abs());
                }
            }
        }
    }
    out.push(Check::at_most("change-of-basis", basis.value, 1e-9, basis.count));
    if dirs.count > 0 {
        out.push(Check::at_most("principal-direction-transport", dirs.value, 1e-8, dirs.count));
    }

    if s.has_c_field() {
        let worst = frames
            .iter()
            .filter_map(|f| f.c.map(|c| inf_norm2(&(f.second_omega - c * f.lambda_m.transpose()))))
            .fold(0.0, f64::max);
        out.push(Check::at_most("attached-factor", worst, 1e-8, total));
    }

    let (mut kbar, mut hbar) = (Max::default(), Max::default());
    for f in frames.iter().filter(|f| regular(f)) {
        let Some((k, h)) = f.classical() else { continue };
        let extended = match (f.b_from_c(), f.k_bar) {
            (Some(b), _) => Some((b.determinant(), Some(-0.5 * b.trace()))),
            (None, Some(kb)) => Some((kb, None)),
            _ => None,
        };
        if let Some((kb, hb)) = extended {
            kbar.add((kb - k).abs() / (1.0 + k.abs()));
            if let Some(hb) = hb {
                hbar.add((hb - h).abs() / (1.0 + h.abs()));
            }
        }
    }
    if kbar.count > 0 {
        out.push(Check::at_most("k-bar-agreement", kbar.value, 1e-6, kbar.count));
    }
    if hbar.count > 0 {
        out.push(Check::at_most("h-bar-agreement", hbar.value, 1e-6, hbar.count));
    }

    if let Some((h, c)) = height {
        out.push(Check::at_most("pde-residual", pde_residual(h, *c, &s.domain(), n)?, 1e-10, n * n));
    }

    let compat: Vec<f64> = data.iter().filter_map(|(p, _)| compatibility(p)).collect();
    if !compat.is_empty() {
        out.push(Check::at_most("compatibility", compat.iter().copied().fold(0.0, f64::max), 1e-9, compat.len()));
    }

    let grid = n.max(singular::MIN_GRID) | 1;
    let mode = if s.has_c_field() { Mode::Analytic } else { Mode::Numeric };
    let ext = extendability_test(s, mode, grid)?;
    if ext.extendable {
        let fronts = ext
            .singular_points
            .iter()
            .map(|&(u, v)| classify_singularity(s, u, v).map(|r| r.front_type.is_front()))
            .collect::<Result<Vec<bool>>>()?;
        let bad = fronts.iter().filter(|&&b| b).count();
        out.push(Check::at_most("classification-consistency", bad as f64, 0.0, fronts.len()));
    }

    curve_checks(s, &mut out)?;
    Ok(out)
}

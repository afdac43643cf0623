//! Direction fields for G-asymptotic curves and Gaussian lines of curvature,
//! fixed-step flow tracing and residual checks along traced curves.

use std::fmt;
use std::sync::Arc;

use nalgebra::{Matrix2, Vector2};
use serde::Serialize;

use crate::error::{At, Error, Result};
use crate::frame::{invariant_frame_unchecked, InvariantFrame};
use crate::linalg::adj;
use crate::singular::TAU_SING;
use crate::surface::{Domain, FrontalSurface};

pub const TAU_BRANCH: f64 = 1e-6;
pub const TAU_DISC: f64 = 1e-10;
pub const NEGATIVE_K_TOL: f64 = 1e-10;
pub const DEGENERATE_FIELD: f64 = 1e-12;
pub const DEFAULT_STEP: f64 = 1e-3;
pub const CHART_GRID: usize = 17;
pub const MAX_SHRINKS: usize = 6;

/// `[[0, 1], [-1, 0]]`
pub const P: Matrix2<f64> = Matrix2::new(0.0, 1.0, -1.0, 0.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FieldKind {
    Asymptotic1,
    Asymptotic2,
    CurvatureLine1,
    CurvatureLine2,
    Custom,
}

impl FieldKind {
    pub fn as_str(self) -> &'static str {
        match self {
            FieldKind::Asymptotic1 => "asymptotic-1",
            FieldKind::Asymptotic2 => "asymptotic-2",
            FieldKind::CurvatureLine1 => "curvature-line-1",
            FieldKind::CurvatureLine2 => "curvature-line-2",
            FieldKind::Custom => "custom",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [
            FieldKind::Asymptotic1,
            FieldKind::Asymptotic2,
            FieldKind::CurvatureLine1,
            FieldKind::CurvatureLine2,
            FieldKind::Custom,
        ]
        .into_iter()
        .find(|k| k.as_str() == s)
    }

    pub fn is_asymptotic(self) -> bool {
        matches!(self, FieldKind::Asymptotic1 | FieldKind::Asymptotic2)
    }

    pub fn is_curvature_line(self) -> bool {
        matches!(self, FieldKind::CurvatureLine1 | FieldKind::CurvatureLine2)
    }
}

impl fmt::Display for FieldKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

type VecFn = Arc<dyn Fn(f64, f64) -> Result<Vector2<f64>> + Send + Sync>;
type ScalarFn = Arc<dyn Fn(f64, f64) -> Result<f64> + Send + Sync>;

/// A parameter-space vector field on a chart.
#[derive(Clone)]
pub struct DirectionField {
    pub kind: FieldKind,
    pub provenance: String,
    pub chart: Domain,
    eval: VecFn,
    eigenvalue: Option<ScalarFn>,
}

impl fmt::Debug for DirectionField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DirectionField")
            .field("kind", &self.kind)
            .field("provenance", &self.provenance)
            .field("chart", &self.chart)
            .finish_non_exhaustive()
    }
}

impl DirectionField {
    pub fn custom<F>(provenance: &str, chart: Domain, f: F) -> Self
    where
        F: Fn(f64, f64) -> Result<Vector2<f64>> + Send + Sync + 'static,
    {
        DirectionField { kind: FieldKind::Custom, provenance: provenance.to_string(), chart, eval: Arc::new(f), eigenvalue: None }
    }

    pub fn eval(&self, u: f64, v: f64) -> Result<Vector2<f64>> {
        self.eval.as_ref()(u, v)
    }

    /// The eigenvalue `ρ` attached to a curvature-line field.
    pub fn eigenvalue(&self, u: f64, v: f64) -> Option<Result<f64>> {
        self.eigenvalue.as_ref().map(|f| f(u, v))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Termination {
    StepsExhausted,
    LeftDomain,
    FieldDegenerate,
}

impl Termination {
    pub fn as_str(self) -> &'static str {
        match self {
            Termination::StepsExhausted => "steps-exhausted",
            Termination::LeftDomain => "left-domain",
            Termination::FieldDegenerate => "field-degenerate",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TracedCurve {
    pub kind: FieldKind,
    /// `(t, u, v)`
    pub vertices: Vec<(f64, f64, f64)>,
    /// Field value at each vertex.
    pub velocities: Vec<(f64, f64)>,
    pub residuals: Vec<f64>,
    pub termination: Termination,
}

impl TracedCurve {
    pub fn points(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.vertices.iter().map(|&(_, u, v)| (u, v))
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().fold(0.0, |a, &b| a.max(b.abs()))
    }
}

fn frames_on(s: &FrontalSurface, chart: &Domain, p: (f64, f64)) -> Result<Vec<InvariantFrame>> {
    let mut pts = chart.grid(CHART_GRID, CHART_GRID);
    pts.push(p);
    pts.iter().map(|&(u, v)| invariant_frame_unchecked(s, u, v)).collect()
}

fn attached_c(f: &InvariantFrame) -> Result<Matrix2<f64>> {
    f.c.map(|c| 0.5 * (c + c.transpose())).ok_or_else(|| {
        Error::NotExtendable(format!("no analytic factor at {}", At(f.point.0, f.point.1)))
    })
}

fn b_matrix(f: &InvariantFrame) -> Result<Matrix2<f64>> {
    let c = attached_c(f)?;
    let inv = f.first_omega.try_inverse().ok_or(Error::DegenerateBasis(At(f.point.0, f.point.1)))?;
    Ok(-(c.transpose() * inv))
}

/// Shrinks the domain about `p` until `accept` holds on the whole chart.
fn find_chart<T>(
    s: &FrontalSurface,
    p: (f64, f64),
    mut accept: impl FnMut(&[InvariantFrame]) -> Result<std::result::Result<T, Error>>,
) -> Result<(Domain, T)> {
    if !s.domain().contains(p.0, p.1) {
        return Err(Error::OutsideDomain(At(p.0, p.1)));
    }
    let mut chart = s.domain();
    let mut last = Error::BranchUndetermined(At(p.0, p.1));
    for _ in 0..=MAX_SHRINKS {
        let frames = frames_on(s, &chart, p)?;
        match accept(&frames)? {
            Ok(t) => return Ok((chart, t)),
            Err(e) => last = e,
        }
        chart = chart.shrink_about(p, 0.5);
    }
    Err(last)
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Branch {
    /// `|c12|` bounded away from zero, with its sign.
    Mixed(f64),
    /// `|c11|` bounded away from zero.
    First,
    /// `|c22|` bounded away from zero.
    Second,
}

impl Branch {
    fn name(self) -> &'static str {
        match self {
            Branch::Mixed(_) => "case-1",
            Branch::First => "case-2",
            Branch::Second => "case-2-swapped",
        }
    }

    /// Null directions `ρ` of `ρ^T C ρ`, in a fixed order.
    fn factors(self, c: &Matrix2<f64>) -> [Vector2<f64>; 2] {
        let (c11, c12, c22) = (c[(0, 0)], c[(0, 1)], c[(1, 1)]);
        let root = (c12 * c12 - c11 * c22).max(0.0).sqrt();
        match self {
            Branch::Mixed(sign) => {
                let m = c12 + sign * root;
                [Vector2::new(-c22, m), Vector2::new(m, -c11)]
            }
            Branch::First => [Vector2::new(-(c12 + root), c11), Vector2::new(-(c12 - root), c11)],
            Branch::Second => [Vector2::new(c22, -(c12 + root)), Vector2::new(c22, -(c12 - root))],
        }
    }
}

/// The two G-asymptotic fields `adj(Λ)^T ρ` built from the factorization of `C`.
pub fn asymptotic_fields(s: &FrontalSurface, p: (f64, f64)) -> Result<(DirectionField, DirectionField)> {
    let (chart, branch) = find_chart(s, p, |frames| {
        let mut cs = Vec::with_capacity(frames.len());
        for f in frames {
            let c = attached_c(f)?;
            let k = c.determinant() / f.first_omega.determinant();
            if k >= -NEGATIVE_K_TOL {
                return Ok(Err(Error::NonNegativeCurvature { at: At(f.point.0, f.point.1), value: k }));
            }
            cs.push(c);
        }
        let min = |i: usize, j: usize| cs.iter().map(|c| c[(i, j)].abs()).fold(f64::INFINITY, f64::min);
        let center = cs.last().expect("chart has samples");
        Ok(if min(0, 1) > TAU_BRANCH {
            Ok(Branch::Mixed(center[(0, 1)].signum()))
        } else if min(0, 0) > TAU_BRANCH {
            Ok(Branch::First)
        } else if min(1, 1) > TAU_BRANCH {
            Ok(Branch::Second)
        } else {
            Err(Error::BranchUndetermined(At(p.0, p.1)))
        })
    })?;
    let make = |idx: usize, kind: FieldKind| {
        let s = s.clone();
        DirectionField {
            kind,
            provenance: format!("{} factor {}", branch.name(), idx + 1),
            chart,
            eval: Arc::new(move |u, v| {
                let f = invariant_frame_unchecked(&s, u, v)?;
                let rho = branch.factors(&attached_c(&f)?)[idx];
                Ok(adj(&f.lambda_m).transpose() * rho)
            }),
            eigenvalue: None,
        }
    };
    Ok((make(0, FieldKind::Asymptotic1), make(1, FieldKind::Asymptotic2)))
}

/// Constant fields `(∓1, √(-c))` on a wave-type extendable-K surface.
pub fn asymptotic_fields_front_k(s: &FrontalSurface) -> Result<(DirectionField, DirectionField)> {
    let wrong = || Error::WrongGeneratorKind { expected: "extendable-K-wave", got: s.kind().to_string() };
    if s.kind() != "extendable-K-wave" {
        return Err(wrong());
    }
    let c: f64 = s.provenance().param("c").and_then(|c| c.parse().ok()).ok_or_else(wrong)?;
    let k = (-c).sqrt();
    let make = |sign: f64, kind: FieldKind| DirectionField {
        kind,
        provenance: format!("({}, sqrt(-c))", if sign < 0.0 { "-1" } else { "1" }),
        chart: s.domain(),
        eval: Arc::new(move |_, _| Ok(Vector2::new(sign, k))),
        eigenvalue: None,
    };
    Ok((make(-1.0, FieldKind::Asymptotic1), make(1.0, FieldKind::Asymptotic2)))
}

/// Eigenvalues `ρ+ >= ρ-` of `B^T`, and the discriminant.
fn eigen_b(b: &Matrix2<f64>) -> (f64, f64, f64) {
    let half = 0.5 * b.trace();
    let disc = half * half - b.determinant();
    let r = disc.max(0.0).sqrt();
    (half + r, half - r, disc)
}

fn kernel_row(m: &Matrix2<f64>, row: usize) -> Vector2<f64> {
    P * Vector2::new(m[(row, 0)], m[(row, 1)])
}

/// Gaussian line of curvature fields `adj(Λ)^T η` for the two eigenvalues of `B^T`.
pub fn curvature_line_fields(s: &FrontalSurface, p: (f64, f64)) -> Result<(DirectionField, DirectionField)> {
    let (chart, rows) = find_chart(s, p, |frames| {
        let mut shifted = Vec::with_capacity(2 * frames.len());
        for f in frames {
            let b = b_matrix(f)?;
            let (hi, lo, disc) = eigen_b(&b);
            if disc <= TAU_DISC {
                return Ok(Err(Error::UmbilicChart { at: At(f.point.0, f.point.1), disc }));
            }
            let bt = b.transpose();
            shifted.push((bt - Matrix2::identity() * hi, bt - Matrix2::identity() * lo));
        }
        let (ch, cl) = *shifted.last().expect("chart has samples");
        let pick = |m: &Matrix2<f64>| usize::from(m.row(1).norm() > m.row(0).norm());
        let rows = (pick(&ch), pick(&cl));
        let floor = shifted
            .iter()
            .map(|(h, l)| kernel_row(h, rows.0).norm().min(kernel_row(l, rows.1).norm()))
            .fold(f64::INFINITY, f64::min);
        Ok(if floor > TAU_BRANCH { Ok(rows) } else { Err(Error::BranchUndetermined(At(p.0, p.1))) })
    })?;
    let make = |plus: bool, row: usize, kind: FieldKind| {
        let (s1, s2) = (s.clone(), s.clone());
        let rho = move |s: &FrontalSurface, u: f64, v: f64| -> Result<(InvariantFrame, f64, Matrix2<f64>)> {
            let f = invariant_frame_unchecked(s, u, v)?;
            let b = b_matrix(&f)?;
            let (hi, lo, _) = eigen_b(&b);
            let r = if plus { hi } else { lo };
            Ok((f, r, b.transpose() - Matrix2::identity() * r))
        };
        DirectionField {
            kind,
            provenance: format!("rho{} row {}", if plus { "+" } else { "-" }, row + 1),
            chart,
            eval: Arc::new(move |u, v| {
                let (f, _, m) = rho(&s1, u, v)?;
                Ok(adj(&f.lambda_m).transpose() * kernel_row(&m, row))
            }),
            eigenvalue: Some(Arc::new(move |u, v| Ok(rho(&s2, u, v)?.1))),
        }
    };
    Ok((make(true, rows.0, FieldKind::CurvatureLine1), make(false, rows.1, FieldKind::CurvatureLine2)))
}

/// Classic RK4 with fixed step `h` from `q`.
pub fn trace_flow(f: &DirectionField, q: (f64, f64), h: f64, n_steps: usize, domain: &Domain) -> TracedCurve {
    let field = |u: f64, v: f64| -> Option<Vector2<f64>> {
        match f.eval(u, v) {
            Ok(w) if w.iter().all(|x| x.is_finite()) && w.norm() >= DEGENERATE_FIELD => Some(w),
            _ => None,
        }
    };
    let mut curve = TracedCurve {
        kind: f.kind,
        vertices: vec![(0.0, q.0, q.1)],
        velocities: Vec::new(),
        residuals: Vec::new(),
        termination: Termination::StepsExhausted,
    };
    let Some(mut k1) = field(q.0, q.1) else {
        curve.velocities.push(f.eval(q.0, q.1).map_or((0.0, 0.0), |w| (w.x, w.y)));
        curve.termination = Termination::FieldDegenerate;
        return curve;
    };
    curve.velocities.push((k1.x, k1.y));
    let mut y = Vector2::new(q.0, q.1);
    for step in 1..=n_steps {
        let next = (|| {
            let k2 = field(y.x + 0.5 * h * k1.x, y.y + 0.5 * h * k1.y)?;
            let k3 = field(y.x + 0.5 * h * k2.x, y.y + 0.5 * h * k2.y)?;
            let k4 = field(y.x + h * k3.x, y.y + h * k3.y)?;
            Some(y + (k1 + 2.0 * k2 + 2.0 * k3 + k4) * (h / 6.0))
        })();
        let Some(y1) = next else {
            curve.termination = Termination::FieldDegenerate;
            break;
        };
        if !domain.contains(y1.x, y1.y) {
            curve.termination = Termination::LeftDomain;
            break;
        }
        y = y1;
        curve.vertices.push((step as f64 * h, y.x, y.y));
        match field(y.x, y.y) {
            Some(w) => {
                curve.velocities.push((w.x, w.y));
                k1 = w;
            }
            None => {
                curve.velocities.push(f.eval(y.x, y.y).map_or((0.0, 0.0), |w| (w.x, w.y)));
                curve.termination = Termination::FieldDegenerate;
                break;
            }
        }
    }
    curve
}

fn per_vertex(
    s: &FrontalSurface,
    curve: &TracedCurve,
    mut g: impl FnMut(&InvariantFrame, Vector2<f64>, usize) -> Result<f64>,
) -> Result<Vec<f64>> {
    curve
        .vertices
        .iter()
        .zip(&curve.velocities)
        .enumerate()
        .map(|(i, (&(_, u, v), &(a, b)))| {
            let f = invariant_frame_unchecked(s, u, v)?;
            g(&f, Vector2::new(a, b), i)
        })
        .collect()
}

/// `|γ'^T II γ'|` at each vertex.
pub fn g_asymptotic_residuals(s: &FrontalSurface, curve: &TracedCurve) -> Result<Vec<f64>> {
    per_vertex(s, curve, |f, w, _| Ok(w.dot(&(f.second * w)).abs()))
}

pub fn g_asymptotic_residual(s: &FrontalSurface, curve: &TracedCurve) -> Result<f64> {
    Ok(max_abs(&g_asymptotic_residuals(s, curve)?))
}

/// `|λ_Ω γ'^T P α_Ω^T γ'|` at each vertex.
pub fn line_of_curvature_residuals(s: &FrontalSurface, curve: &TracedCurve) -> Result<Vec<f64>> {
    per_vertex(s, curve, |f, w, _| Ok((f.lambda * w.dot(&(P * f.alpha.transpose() * w))).abs()))
}

pub fn line_of_curvature_residual(s: &FrontalSurface, curve: &TracedCurve) -> Result<f64> {
    Ok(max_abs(&line_of_curvature_residuals(s, curve)?))
}

/// `‖Dn γ' - ρ Dx γ'‖` at each vertex, with `ρ` the field's eigenvalue.
pub fn gaussian_line_residuals(s: &FrontalSurface, field: &DirectionField, curve: &TracedCurve) -> Result<Vec<f64>> {
    if field.eigenvalue.is_none() {
        return Err(Error::PreconditionFailed(format!("{} field carries no eigenvalue", field.kind)));
    }
    per_vertex(s, curve, |f, w, _| {
        let rho = field.eigenvalue(f.point.0, f.point.1).expect("checked above")?;
        Ok((f.dn * w - f.dx * w * rho).norm())
    })
}

pub fn gaussian_line_residual(s: &FrontalSurface, field: &DirectionField, curve: &TracedCurve) -> Result<f64> {
    Ok(max_abs(&gaussian_line_residuals(s, field, curve)?))
}

/// Fills `curve.residuals` with the defect matching its kind.
pub fn attach_residuals(s: &FrontalSurface, curve: &mut TracedCurve) -> Result<()> {
    curve.residuals = if curve.kind.is_curvature_line() {
        line_of_curvature_residuals(s, curve)?
    } else {
        g_asymptotic_residuals(s, curve)?
    };
    Ok(())
}

/// Smallest `|det(a, b)|` over the given points where the surface is regular.
pub fn min_independence(
    s: &FrontalSurface,
    a: &DirectionField,
    b: &DirectionField,
    points: &[(f64, f64)],
) -> Result<Option<f64>> {
    let mut worst: Option<f64> = None;
    for &(u, v) in points {
        let f = invariant_frame_unchecked(s, u, v)?;
        if f.lambda.abs() <= TAU_SING {
            continue;
        }
        let d = Matrix2::from_columns(&[a.eval(u, v)?, b.eval(u, v)?]).determinant().abs();
        worst = Some(worst.map_or(d, |w: f64| w.min(d)));
    }
    Ok(worst)
}

fn max_abs(r: &[f64]) -> f64 {
    r.iter().fold(0.0, |a, &b| a.max(b.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{Expr, Univariate};
    use crate::generators::{gen_extendable_k_wave, gen_false_singularity, Immersion};
    use approx::assert_abs_diff_eq;

    fn e(s: &str) -> Expr {
        Expr::parse(s).unwrap()
    }

    #[test]
    fn p_matrix_is_a_quarter_turn() {
        assert_eq!(P.transpose(), -P);
        assert_eq!(P * P, -Matrix2::identity());
    }

    #[test]
    fn zero_field_gives_single_vertex() {
        let d = Domain::square(1.0);
        let f = DirectionField::custom("zero", d, |_, _| Ok(Vector2::zeros()));
        let c = trace_flow(&f, (0.1, 0.2), 0.01, 10, &d);
        assert_eq!(c.vertices, vec![(0.0, 0.1, 0.2)]);
        assert_eq!(c.termination, Termination::FieldDegenerate);
    }

    #[test]
    fn constant_field_is_exact() {
        let d = Domain::square(2.0);
        let f = DirectionField::custom("diag", d, |_, _| Ok(Vector2::new(1.0, 1.0)));
        let c = trace_flow(&f, (0.0, 0.0), 0.01, 100, &d);
        let &(t, u, v) = c.vertices.last().unwrap();
        assert_abs_diff_eq!(t, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(u, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(v, 1.0, epsilon = 1e-12);
        assert_eq!(c.termination, Termination::StepsExhausted);
    }

    #[test]
    fn leaving_the_domain_stops_inside() {
        let d = Domain::square(0.5);
        let f = DirectionField::custom("right", d, |_, _| Ok(Vector2::new(1.0, 0.0)));
        let c = trace_flow(&f, (0.0, 0.0), 0.1, 100, &d);
        assert_eq!(c.termination, Termination::LeftDomain);
        assert!(c.points().all(|(u, v)| d.contains(u, v)));
    }

    #[test]
    fn sphere_rejects_both_constructions() {
        let s = gen_false_singularity(Immersion::Sphere, &e("u^3"), &e("v"), Domain::square(0.5)).unwrap();
        assert!(matches!(asymptotic_fields(&s, (0.0, 0.0)), Err(Error::NonNegativeCurvature { .. })));
        assert!(matches!(curvature_line_fields(&s, (0.0, 0.0)), Err(Error::UmbilicChart { .. })));
    }

    #[test]
    fn saddle_asymptotic_traces_cross_the_singular_line() {
        let s = gen_false_singularity(Immersion::Graph(e("u*v")), &e("u^3"), &e("v"), Domain::square(0.5)).unwrap();
        let (a, b) = asymptotic_fields(&s, (0.0, 0.0)).unwrap();
        for f in [&a, &b] {
            let c = trace_flow(f, (-0.3, 0.1), 0.01, 60, &s.domain());
            assert!(g_asymptotic_residual(&s, &c).unwrap() <= 1e-6);
        }
        let c = trace_flow(&b, (-0.3, 0.1), 0.01, 60, &s.domain());
        assert!(c.points().any(|(u, _)| u > 0.0));
    }

    #[test]
    fn wave_fields_are_constant() {
        let h = Univariate::parse("u^3/6").unwrap();
        let s = gen_extendable_k_wave(-1.0, &h, &h, Domain::square(0.5)).unwrap();
        let (a, b) = asymptotic_fields_front_k(&s).unwrap();
        assert_eq!(a.eval(0.1, 0.2).unwrap(), Vector2::new(-1.0, 1.0));
        assert_eq!(b.eval(-0.3, 0.0).unwrap(), Vector2::new(1.0, 1.0));
        let other = gen_false_singularity(Immersion::Sphere, &e("u"), &e("v"), Domain::square(0.5)).unwrap();
        assert!(matches!(asymptotic_fields_front_k(&other), Err(Error::WrongGeneratorKind { .. })));
    }

    #[test]
    fn curvature_lines_satisfy_both_identities() {
        let s = gen_false_singularity(Immersion::Graph(e("u^2 + 2*v^2")), &e("u^3"), &e("v"), Domain::square(0.5))
            .unwrap();
        let (a, b) = curvature_line_fields(&s, (0.0, 0.0)).unwrap();
        for f in [&a, &b] {
            assert!(f.chart.contains(0.1, 0.05));
            let c = trace_flow(f, (0.1, 0.05), 0.005, 40, &f.chart);
            assert!(c.vertices.len() > 1);
            assert!(line_of_curvature_residual(&s, &c).unwrap() <= 1e-6);
            assert!(gaussian_line_residual(&s, f, &c).unwrap() <= 1e-6);
        }
    }
}

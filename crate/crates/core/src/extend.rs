//! Extendability of the normal curvature across the singular set.

use std::f64::consts::PI;

use nalgebra::Matrix2;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{At, Error, Result};
use crate::frame::{invariant_frame, invariant_frame_unchecked, InvariantFrame};
use crate::linalg;
use crate::singular::{self, TAU_SING};
use crate::surface::FrontalSurface;

pub const ANALYTIC_TOL: f64 = 1e-8;
pub const CAUCHY_TOL: f64 = 1e-3;
pub const BOUND: f64 = 1e3;
pub const RAYS: usize = 8;
pub const SCALES: usize = 10;
pub const MAX_POINTS: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Analytic,
    Numeric,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Analytic => "analytic",
            Mode::Numeric => "numeric",
        }
    }
}

/// `B` (with `μ = Λ B`) estimated at one point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BSample {
    pub point: (f64, f64),
    pub b: Matrix2<f64>,
}

/// A ratio sequence that failed the stability test.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Evidence {
    pub point: (f64, f64),
    pub angle: f64,
    pub entry: (usize, usize),
    pub distances: Vec<f64>,
    pub ratios: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Extendability {
    pub mode: Mode,
    pub extendable: bool,
    pub singular_points: Vec<(f64, f64)>,
    pub samples: Vec<BSample>,
    /// Analytic mode: largest `|II_Ω - C Λ^T|` on the grid.
    pub max_residual: Option<f64>,
    /// Numeric mode: largest ratio entry at the finest scale.
    pub max_finest_ratio: Option<f64>,
    pub evidence: Option<Evidence>,
}

fn b_from_c(f: &InvariantFrame, c: &Matrix2<f64>) -> Result<Matrix2<f64>> {
    let inv = f
        .first_omega
        .try_inverse()
        .ok_or(Error::DegenerateBasis(At(f.point.0, f.point.1)))?;
    Ok(-(c.transpose() * inv))
}

pub fn extendability_test(s: &FrontalSurface, mode: Mode, grid: usize) -> Result<Extendability> {
    singular::check_proper(s, grid)?;
    let curves = singular::singular_set(s, grid, grid)?;
    let points = singular::sample_singular_points(&curves, MAX_POINTS);
    match mode {
        Mode::Analytic => analytic(s, grid, points),
        Mode::Numeric => numeric(s, points),
    }
}

fn analytic(s: &FrontalSurface, grid: usize, points: Vec<(f64, f64)>) -> Result<Extendability> {
    let frames: Vec<InvariantFrame> = s
        .domain()
        .grid(grid, grid)
        .par_iter()
        .map(|&(u, v)| invariant_frame(s, u, v))
        .collect::<Result<_>>()?;
    let mut worst = 0.0f64;
    for f in &frames {
        let c = f
            .c
            .ok_or_else(|| Error::NotExtendable("analytic mode needs a surface with an attached factor".into()))?;
        let r = f.second_omega - c * f.lambda_m.transpose();
        worst = worst.max(linalg::inf_norm2(&r));
    }
    let mut samples = Vec::with_capacity(points.len());
    for &(u, v) in &points {
        let f = invariant_frame(s, u, v)?;
        let c = f.c.expect("checked on the grid");
        samples.push(BSample { point: (u, v), b: b_from_c(&f, &c)? });
    }
    Ok(Extendability {
        mode: Mode::Analytic,
        extendable: worst <= ANALYTIC_TOL,
        singular_points: points,
        samples,
        max_residual: Some(worst),
        max_finest_ratio: None,
        evidence: None,
    })
}

struct Ray {
    angle: f64,
    distances: Vec<f64>,
    ratios: Vec<Matrix2<f64>>,
    frames: Vec<InvariantFrame>,
}

fn start_distance(s: &FrontalSurface) -> f64 {
    0.1f64.min(0.25 * s.domain().extent())
}

/// Samples `S / λ_Ω` along a ray towards `q`, coarse to fine.
fn sample_ray(s: &FrontalSurface, q: (f64, f64), angle: f64) -> Result<Ray> {
    let d0 = start_distance(s);
    let dom = s.domain();
    let mut ray = Ray { angle, distances: Vec::new(), ratios: Vec::new(), frames: Vec::new() };
    for k in 0..SCALES {
        let d = d0 / 2f64.powi(k as i32);
        let (u, v) = (q.0 + d * angle.cos(), q.1 + d * angle.sin());
        if !dom.contains(u, v) {
            continue;
        }
        let f = invariant_frame_unchecked(s, u, v)?;
        if f.lambda.abs() <= TAU_SING {
            continue;
        }
        ray.distances.push(d);
        ray.ratios.push(f.shape() / f.lambda);
        ray.frames.push(f);
    }
    Ok(ray)
}

fn ray_angles() -> impl Iterator<Item = f64> {
    (0..RAYS).map(|r| PI / 8.0 + r as f64 * 2.0 * PI / RAYS as f64)
}

/// Stability verdict for one ray; `None` if it has fewer than two usable scales.
fn judge(ray: &Ray) -> Option<(bool, (usize, usize), f64)> {
    let n = ray.ratios.len();
    if n < 2 {
        return None;
    }
    let mut worst: Option<(bool, (usize, usize), f64)> = None;
    for i in 0..2 {
        for j in 0..2 {
            let seq: Vec<f64> = ray.ratios.iter().map(|m| m[(i, j)]).collect();
            let diff = (seq[n - 1] - seq[n - 2]).abs();
            let bounded = seq.iter().all(|x| x.abs() <= BOUND);
            let ok = diff < CAUCHY_TOL && bounded;
            let finest = seq[n - 1].abs();
            let replace = match worst {
                None => true,
                Some((wok, _, wf)) => (wok && !ok) || (wok == ok && finest > wf),
            };
            if replace {
                worst = Some((ok, (i, j), finest));
            }
        }
    }
    worst
}

fn numeric(s: &FrontalSurface, points: Vec<(f64, f64)>) -> Result<Extendability> {
    let rays: Vec<((f64, f64), Ray)> = points
        .par_iter()
        .flat_map_iter(|&q| ray_angles().map(move |a| (q, a)))
        .map(|(q, a)| sample_ray(s, q, a).map(|r| (q, r)))
        .collect::<Result<_>>()?;
    let mut extendable = true;
    let mut evidence: Option<(f64, Evidence)> = None;
    let mut max_finest = 0.0f64;
    for (q, ray) in &rays {
        let Some((ok, entry, finest)) = judge(ray) else { continue };
        max_finest = max_finest.max(finest);
        if !ok {
            extendable = false;
            if evidence.as_ref().is_none_or(|(f, _)| finest > *f) {
                evidence = Some((
                    finest,
                    Evidence {
                        point: *q,
                        angle: ray.angle,
                        entry,
                        distances: ray.distances.clone(),
                        ratios: ray.ratios.iter().map(|m| m[entry]).collect(),
                    },
                ));
            }
        }
    }
    let mut samples = Vec::new();
    if extendable {
        for &q in &points {
            if let Ok(b) = limit_b(&rays, q) {
                samples.push(BSample { point: q, b });
            }
        }
    }
    Ok(Extendability {
        mode: Mode::Numeric,
        extendable,
        singular_points: points,
        samples,
        max_residual: None,
        max_finest_ratio: Some(max_finest),
        evidence: evidence.map(|(_, e)| e),
    })
}

/// Mean over rays of the finest-scale `B` estimate at `q`.
fn limit_b(rays: &[((f64, f64), Ray)], q: (f64, f64)) -> Result<Matrix2<f64>> {
    let mut sum = Matrix2::zeros();
    let mut count = 0;
    for (p, ray) in rays {
        if *p != q || ray.ratios.is_empty() {
            continue;
        }
        let k = ray.ratios.len() - 1;
        sum += b_from_c(&ray.frames[k], &ray.ratios[k])?;
        count += 1;
    }
    if count == 0 {
        return Err(Error::NotExtendable(format!("no usable samples near {}", At(q.0, q.1))));
    }
    Ok(sum / count as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CurvatureSource {
    Analytic,
    AttachedGaussian,
    Regular,
    RayLimit,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExtendedCurvatures {
    pub k: f64,
    pub h: Option<f64>,
    pub source: CurvatureSource,
}

/// Smooth extensions `K̄ = det B` and `H̄ = -tr B / 2` at `(u, v)`.
pub fn extended_curvatures(s: &FrontalSurface, u: f64, v: f64) -> Result<ExtendedCurvatures> {
    let f = invariant_frame(s, u, v)?;
    if let Some(c) = f.c {
        let b = b_from_c(&f, &c)?;
        return Ok(ExtendedCurvatures { k: b.determinant(), h: Some(-0.5 * b.trace()), source: CurvatureSource::Analytic });
    }
    if let Some(k) = f.k_bar {
        return Ok(ExtendedCurvatures { k, h: None, source: CurvatureSource::AttachedGaussian });
    }
    if f.lambda.abs() > TAU_SING {
        let b = b_from_c(&f, &(f.shape() / f.lambda))?;
        return Ok(ExtendedCurvatures { k: b.determinant(), h: Some(-0.5 * b.trace()), source: CurvatureSource::Regular });
    }
    let mut rays = Vec::new();
    for a in ray_angles() {
        let ray = sample_ray(s, (u, v), a)?;
        match judge(&ray) {
            Some((false, entry, finest)) => {
                return Err(Error::NotExtendable(format!(
                    "ratio entry {entry:?} reaches {finest:e} approaching {}",
                    At(u, v)
                )))
            }
            Some((true, ..)) => rays.push(((u, v), ray)),
            None => {}
        }
    }
    let b = limit_b(&rays, (u, v))?;
    Ok(ExtendedCurvatures { k: b.determinant(), h: Some(-0.5 * b.trace()), source: CurvatureSource::RayLimit })
}

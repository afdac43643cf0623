//! Parallel surfaces `x + l n` and the parallel smoothability test.

use nalgebra::Matrix2;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{At, Error, Result};
use crate::frame::{invariant_frame, InvariantFrame};
use crate::jets::Jet3;
use crate::linalg;
use crate::singular::TAU_SING;
use crate::surface::FrontalSurface;

pub const RANK_TOL: f64 = 1e-8;
pub const DEFAULT_EPS: f64 = 0.1;
pub const DEFAULT_GRID: usize = 41;
pub const SCALES: usize = 8;

/// `x + l n` with the same tangent moving basis.
pub fn parallel_surface(s: &FrontalSurface, l: f64) -> FrontalSurface {
    let inner = s.clone();
    let mut prov = s.provenance().clone().with("parallel", l);
    prov.kind = format!("parallel({})", s.kind());
    FrontalSurface::new(s.domain(), prov, move |u, v| {
        let mut p = inner.eval_unchecked(u, v)?;
        let n = p.normal(At(u, v))?;
        let x: Jet3 = std::array::from_fn(|k| p.x[k] + n[k] * l);
        p.x = x;
        p.c = None;
        p.k_bar = None;
        Ok(p)
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SideResult {
    pub sign: i8,
    pub passes: bool,
    pub min_singular_value: f64,
    pub lambda_sign_change: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Smoothability {
    pub point: (f64, f64),
    pub eps: f64,
    pub offsets: Vec<f64>,
    pub smoothable: bool,
    pub positive: SideResult,
    pub negative: SideResult,
}

fn side(frames: &[InvariantFrame], eps: f64, sign: f64) -> SideResult {
    let mut min_sv = f64::INFINITY;
    let mut seen_pos = false;
    let mut seen_neg = false;
    for k in 0..SCALES {
        let l = sign * eps * 0.5f64.powi(k as i32 + 1);
        for f in frames {
            let d = f.dx + f.dn * l;
            let (_, s2) = linalg::singular_values(&d);
            min_sv = min_sv.min(s2);
            let lam: Matrix2<f64> = f.lambda_m + f.mu * l;
            let det = lam.determinant();
            if det > 0.0 {
                seen_pos = true;
            } else if det < 0.0 {
                seen_neg = true;
            }
        }
    }
    let change = seen_pos && seen_neg;
    SideResult {
        sign: sign as i8,
        passes: min_sv > RANK_TOL && !change,
        min_singular_value: min_sv,
        lambda_sign_change: change,
    }
}

/// Whether one signed family of nearby parallel surfaces is immersive around `p`.
///
/// A side also fails when `λ` of the parallel surface changes sign on the
/// sample grid, since it must then vanish between samples.
pub fn parallelly_smoothable(s: &FrontalSurface, p: (f64, f64), eps: f64, grid: usize) -> Result<Smoothability> {
    if !(eps > 0.0) || grid < 2 {
        return Err(Error::Domain(format!("smoothability needs eps > 0 and grid >= 2, got {eps}, {grid}")));
    }
    let f0 = invariant_frame(s, p.0, p.1)?;
    if f0.lambda.abs() > TAU_SING {
        return Err(Error::PreconditionFailed(format!("{} is not a singular point", At(p.0, p.1))));
    }
    let hood = s.domain().around(p, eps);
    let frames: Vec<InvariantFrame> = hood
        .grid(grid, grid)
        .par_iter()
        .map(|&(u, v)| invariant_frame(s, u, v))
        .collect::<Result<_>>()?;
    let positive = side(&frames, eps, 1.0);
    let negative = side(&frames, eps, -1.0);
    Ok(Smoothability {
        point: p,
        eps,
        offsets: (0..SCALES).map(|k| eps * 0.5f64.powi(k as i32 + 1)).collect(),
        smoothable: positive.passes || negative.passes,
        positive,
        negative,
    })
}

//! Singular set extraction and classification of singular points.

use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{At, Error, Result};
use crate::frame::{invariant_frame, InvariantFrame};
use crate::linalg;
use crate::surface::FrontalSurface;

/// `|λ_Ω|` at or below this counts as singular.
pub const TAU_SING: f64 = 1e-10;
/// Threshold on `|H_Ω|`, `|K_Ω|` for the front criteria.
pub const TAU_FRONT: f64 = 1e-8;
pub const MIN_GRID: usize = 16;
pub const DEFAULT_GRID: usize = 33;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FrontType {
    Regular,
    FrontRank1,
    FrontRank0,
    NonFrontSingularity,
}

impl FrontType {
    pub fn as_str(self) -> &'static str {
        match self {
            FrontType::Regular => "regular",
            FrontType::FrontRank1 => "front-rank1",
            FrontType::FrontRank0 => "front-rank0",
            FrontType::NonFrontSingularity => "non-front-singularity",
        }
    }

    pub fn is_front(self) -> bool {
        matches!(self, FrontType::FrontRank1 | FrontType::FrontRank0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SingularityReport {
    pub point: (f64, f64),
    pub rank: u8,
    pub is_singular: bool,
    pub front_type: FrontType,
    pub lambda: f64,
    pub h_omega: f64,
    pub k_omega: f64,
}

pub fn classify_frame(f: &InvariantFrame) -> SingularityReport {
    let (s1, s2) = linalg::singular_values(&f.dx);
    let rank = (s1 > TAU_SING) as u8 + (s2 > TAU_SING) as u8;
    let is_singular = f.lambda.abs() <= TAU_SING;
    let front_type = if !is_singular {
        FrontType::Regular
    } else if rank == 1 && f.h_omega.abs() > TAU_FRONT {
        FrontType::FrontRank1
    } else if rank == 0 && f.h_omega.abs() <= TAU_FRONT && f.k_omega.abs() > TAU_FRONT {
        FrontType::FrontRank0
    } else {
        FrontType::NonFrontSingularity
    };
    SingularityReport {
        point: f.point,
        rank,
        is_singular,
        front_type,
        lambda: f.lambda,
        h_omega: f.h_omega,
        k_omega: f.k_omega,
    }
}

pub fn classify_singularity(s: &FrontalSurface, u: f64, v: f64) -> Result<SingularityReport> {
    Ok(classify_frame(&invariant_frame(s, u, v)?))
}

/// `λ_Ω` on an `n x m` grid, row-major with u varying fastest.
pub fn lambda_grid(s: &FrontalSurface, n: usize, m: usize) -> Result<Vec<f64>> {
    s.domain()
        .grid(n, m)
        .par_iter()
        .map(|&(u, v)| invariant_frame(s, u, v).map(|f| f.lambda))
        .collect()
}

/// Rejects surfaces whose singular set contains a whole grid cell.
pub fn check_proper(s: &FrontalSurface, n: usize) -> Result<()> {
    let lam = lambda_grid(s, n, n)?;
    check_proper_with(s, n, &lam)
}

fn check_proper_with(s: &FrontalSurface, n: usize, lam: &[f64]) -> Result<()> {
    let d = s.domain();
    let sing = |i: usize, j: usize| lam[j * n + i].abs() <= TAU_SING;
    for j in 0..n - 1 {
        for i in 0..n - 1 {
            if sing(i, j) && sing(i + 1, j) && sing(i, j + 1) && sing(i + 1, j + 1) {
                let (a, b) = d.node(n, n, i, j);
                let (c, e) = d.node(n, n, i + 1, j + 1);
                let center = (0.5 * (a + c), 0.5 * (b + e));
                let f = invariant_frame(s, center.0, center.1)?;
                if f.lambda.abs() <= TAU_SING {
                    return Err(Error::NotProperFrontal(At(center.0, center.1)));
                }
            }
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SingularCurve {
    pub points: Vec<(f64, f64)>,
    pub closed: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
enum EdgeKey {
    H(usize, usize),
    V(usize, usize),
}

/// Finds `t` on the segment `a -> b` where `λ_Ω` vanishes, given a sign change.
fn refine(s: &FrontalSurface, a: (f64, f64), b: (f64, f64), fa: f64, fb: f64) -> Result<(f64, f64)> {
    if fa.abs() <= TAU_SING {
        return Ok(a);
    }
    if fb.abs() <= TAU_SING {
        return Ok(b);
    }
    let at = |t: f64| (a.0 + t * (b.0 - a.0), a.1 + t * (b.1 - a.1));
    let (mut lo, mut hi) = (0.0, 1.0);
    let lo_neg = fa <= 0.0;
    let mut best = (0.5, f64::INFINITY);
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        let p = at(mid);
        let fm = invariant_frame(s, p.0, p.1)?.lambda;
        if fm.abs() < best.1 {
            best = (mid, fm.abs());
        }
        if fm.abs() < TAU_SING {
            break;
        }
        if (fm <= 0.0) == lo_neg {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-16 {
            break;
        }
    }
    Ok(at(best.0))
}

/// Zero set of `λ_Ω` by marching squares with bisection refinement.
pub fn singular_set(s: &FrontalSurface, n: usize, m: usize) -> Result<Vec<SingularCurve>> {
    if n < MIN_GRID || m < MIN_GRID {
        return Err(Error::Domain(format!("singular-set grid {n}x{m} is below {MIN_GRID}x{MIN_GRID}")));
    }
    let d = s.domain();
    let lam = lambda_grid(s, n, m)?;
    let g = |i: usize, j: usize| lam[j * n + i];
    let inside = |i: usize, j: usize| g(i, j) <= 0.0;

    let mut segments: Vec<(EdgeKey, EdgeKey)> = Vec::new();
    for j in 0..m - 1 {
        for i in 0..n - 1 {
            let a = inside(i, j);
            let b = inside(i + 1, j);
            let c = inside(i + 1, j + 1);
            let dd = inside(i, j + 1);
            let bottom = EdgeKey::H(i, j);
            let right = EdgeKey::V(i + 1, j);
            let top = EdgeKey::H(i, j + 1);
            let left = EdgeKey::V(i, j);
            let mut cut = Vec::with_capacity(4);
            if a != b {
                cut.push(bottom);
            }
            if b != c {
                cut.push(right);
            }
            if dd != c {
                cut.push(top);
            }
            if a != dd {
                cut.push(left);
            }
            match cut.len() {
                2 => segments.push((cut[0], cut[1])),
                4 => {
                    let (p0, p1) = (d.node(n, m, i, j), d.node(n, m, i + 1, j + 1));
                    let center = invariant_frame(s, 0.5 * (p0.0 + p1.0), 0.5 * (p0.1 + p1.1))?.lambda;
                    if (center <= 0.0) == a {
                        segments.push((bottom, right));
                        segments.push((top, left));
                    } else {
                        segments.push((bottom, left));
                        segments.push((right, top));
                    }
                }
                _ => {}
            }
        }
    }

    let mut points: HashMap<EdgeKey, (f64, f64)> = HashMap::new();
    for &(k0, k1) in &segments {
        for k in [k0, k1] {
            if points.contains_key(&k) {
                continue;
            }
            let (ia, ja, ib, jb) = match k {
                EdgeKey::H(i, j) => (i, j, i + 1, j),
                EdgeKey::V(i, j) => (i, j, i, j + 1),
            };
            let p = refine(s, d.node(n, m, ia, ja), d.node(n, m, ib, jb), g(ia, ja), g(ib, jb))?;
            points.insert(k, p);
        }
    }

    let mut adj: BTreeMap<EdgeKey, Vec<EdgeKey>> = BTreeMap::new();
    for &(a, b) in &segments {
        adj.entry(a).or_default().push(b);
        adj.entry(b).or_default().push(a);
    }
    let mut used: BTreeMap<EdgeKey, bool> = adj.keys().map(|k| (*k, false)).collect();
    let mut curves = Vec::new();
    let starts: Vec<EdgeKey> = adj
        .iter()
        .filter(|(_, v)| v.len() == 1)
        .map(|(k, _)| *k)
        .chain(adj.keys().copied())
        .collect();
    for start in starts {
        if used[&start] {
            continue;
        }
        let mut chain = vec![start];
        used.insert(start, true);
        let mut cur = start;
        let closed;
        loop {
            let next = adj[&cur].iter().find(|k| !used[*k]).copied();
            match next {
                Some(k) => {
                    used.insert(k, true);
                    chain.push(k);
                    cur = k;
                }
                None => {
                    closed = chain.len() > 2 && adj[&cur].contains(&start);
                    break;
                }
            }
        }
        let mut pts: Vec<(f64, f64)> = chain.iter().map(|k| points[k]).collect();
        pts.dedup();
        curves.push(SingularCurve { points: pts, closed });
    }
    Ok(curves)
}

/// Up to `max` points spread evenly over the extracted singular curves.
pub fn sample_singular_points(curves: &[SingularCurve], max: usize) -> Vec<(f64, f64)> {
    let mut all: Vec<(f64, f64)> = curves.iter().flat_map(|c| c.points.iter().copied()).collect();
    all.dedup();
    if all.len() <= max {
        return all;
    }
    (0..max).map(|k| all[k * all.len() / max]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jets::{Jet2, Jet3, Order};
    use crate::surface::{Domain, Provenance, SurfacePoint};

    /// Graph-like surface with prescribed λ = u^2 + v^2 - r^2 via x = (u, v f, ...).
    fn circle_surface(r: f64) -> FrontalSurface {
        FrontalSurface::new(Domain::square(1.0), Provenance::new("test"), move |u, v| {
            let (ju, jv) = Jet2::coords(Order::Two, u, v);
            let one = Jet2::constant(Order::One, 1.0);
            let zero = Jet2::constant(Order::One, 0.0);
            // x_v = λ e2 with λ = u^2 + v^2 - r^2, integrated in v.
            let y = ju * ju * jv + jv * jv * jv * (1.0 / 3.0) - jv * (r * r);
            let x: Jet3 = [ju.truncate(Order::One), y.truncate(Order::One), zero];
            let yu = y.partial_u()?;
            Ok(SurfacePoint::new(x, [[one, yu, zero], [zero, one, zero]]))
        })
    }

    #[test]
    fn circle_is_closed_curve_on_the_zero_set() {
        let s = circle_surface(0.5);
        let curves = singular_set(&s, 24, 24).unwrap();
        assert_eq!(curves.len(), 1);
        assert!(curves[0].closed);
        for &(u, v) in &curves[0].points {
            assert!((u * u + v * v - 0.25).abs() < 1e-9);
        }
    }

    #[test]
    fn small_grid_rejected() {
        assert!(singular_set(&circle_surface(0.5), 8, 8).is_err());
    }

    #[test]
    fn regular_surface_has_empty_singular_set() {
        let s = circle_surface(0.0);
        // λ = u^2 + v^2 touches zero only at the origin, off the even grid.
        assert!(singular_set(&s, 16, 16).unwrap().is_empty());
        assert!(check_proper(&s, 16).is_ok());
    }
}

//! Frontal surfaces: a jet-evaluable map together with a tangent moving basis.

use std::fmt;
use std::sync::Arc;

use nalgebra::{Matrix2, Matrix3x2};
use serde::{Deserialize, Serialize};

use crate::error::{At, Error, Result};
use crate::jets::{cross, dot, Jet2, Jet3};
use crate::linalg;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Domain {
    pub u0: f64,
    pub u1: f64,
    pub v0: f64,
    pub v1: f64,
}

impl Domain {
    pub fn new(u0: f64, u1: f64, v0: f64, v1: f64) -> Result<Self> {
        let d = Domain { u0, u1, v0, v1 };
        d.validate()?;
        Ok(d)
    }

    pub fn square(half: f64) -> Self {
        Domain { u0: -half, u1: half, v0: -half, v1: half }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = [self.u0, self.u1, self.v0, self.v1].iter().all(|x| x.is_finite())
            && self.u0 < self.u1
            && self.v0 < self.v1;
        if ok {
            Ok(())
        } else {
            Err(Error::Domain(format!(
                "invalid rectangle [{}, {}] x [{}, {}]",
                self.u0, self.u1, self.v0, self.v1
            )))
        }
    }

    pub fn contains(&self, u: f64, v: f64) -> bool {
        let eps = 1e-12 * (1.0 + self.extent());
        u >= self.u0 - eps && u <= self.u1 + eps && v >= self.v0 - eps && v <= self.v1 + eps
    }

    pub fn contains_origin_interior(&self) -> bool {
        self.u0 < 0.0 && 0.0 < self.u1 && self.v0 < 0.0 && 0.0 < self.v1
    }

    pub fn center(&self) -> (f64, f64) {
        (0.5 * (self.u0 + self.u1), 0.5 * (self.v0 + self.v1))
    }

    /// Smaller side length.
    pub fn extent(&self) -> f64 {
        (self.u1 - self.u0).min(self.v1 - self.v0)
    }

    /// Node `(i, j)` of an `n x m` grid spanning the rectangle, `i` along u.
    pub fn node(&self, n: usize, m: usize, i: usize, j: usize) -> (f64, f64) {
        let s = |a: f64, b: f64, k: usize, cnt: usize| {
            if cnt < 2 {
                0.5 * (a + b)
            } else {
                a + (b - a) * k as f64 / (cnt - 1) as f64
            }
        };
        (s(self.u0, self.u1, i, n), s(self.v0, self.v1, j, m))
    }

    /// Grid nodes in row-major order (v outer, u inner).
    pub fn grid(&self, n: usize, m: usize) -> Vec<(f64, f64)> {
        let mut out = Vec::with_capacity(n * m);
        for j in 0..m {
            for i in 0..n {
                out.push(self.node(n, m, i, j));
            }
        }
        out
    }

    /// The rectangle of half-width `r` about `p`, clipped to `self`.
    pub fn around(&self, p: (f64, f64), r: f64) -> Domain {
        Domain {
            u0: (p.0 - r).max(self.u0),
            u1: (p.0 + r).min(self.u1),
            v0: (p.1 - r).max(self.v0),
            v1: (p.1 + r).min(self.v1),
        }
    }

    /// Shrinks the rectangle about `p` by `factor`, keeping `p` inside.
    pub fn shrink_about(&self, p: (f64, f64), factor: f64) -> Domain {
        Domain {
            u0: p.0 - (p.0 - self.u0) * factor,
            u1: p.0 + (self.u1 - p.0) * factor,
            v0: p.1 - (p.1 - self.v0) * factor,
            v1: p.1 + (self.v1 - p.1) * factor,
        }
    }
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}] x [{}, {}]", self.u0, self.u1, self.v0, self.v1)
    }
}

/// Everything a surface yields at one parameter point.
///
/// `x` and both columns of `omega` are at least first-order jets. `c` is the
/// factor with `II_Ω = C Λ^T` when the construction supplies it.
#[derive(Debug, Clone)]
pub struct SurfacePoint {
    pub x: Jet3,
    pub omega: [Jet3; 2],
    pub c: Option<Matrix2<f64>>,
    pub k_bar: Option<f64>,
}

impl SurfacePoint {
    pub fn new(x: Jet3, omega: [Jet3; 2]) -> Self {
        SurfacePoint { x, omega, c: None, k_bar: None }
    }

    pub fn dx(&self) -> Matrix3x2<f64> {
        linalg::jacobian(&self.x)
    }

    pub fn omega_matrix(&self) -> Matrix3x2<f64> {
        linalg::columns(&linalg::value3(&self.omega[0]), &linalg::value3(&self.omega[1]))
    }

    /// Unit normal `w1 x w2 / |w1 x w2|` as first-order jets.
    pub fn normal(&self, at: At) -> Result<Jet3> {
        unit_normal(&self.omega, at)
    }
}

pub fn unit_normal(omega: &[Jet3; 2], at: At) -> Result<Jet3> {
    let w = cross(&omega[0], &omega[1]);
    let norm2 = dot(&w, &w);
    if norm2.value().sqrt() <= 1e-12 {
        return Err(Error::DegenerateBasis(at));
    }
    let inv: Jet2 = norm2.sqrt()?.recip()?;
    Ok([w[0] * inv, w[1] * inv, w[2] * inv])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub kind: String,
    pub params: Vec<(String, String)>,
}

impl Provenance {
    pub fn new(kind: &str) -> Self {
        Provenance { kind: kind.to_string(), params: Vec::new() }
    }

    pub fn with(mut self, name: &str, value: impl ToString) -> Self {
        self.params.push((name.to_string(), value.to_string()));
        self
    }

    pub fn param(&self, name: &str) -> Option<&str> {
        self.params.iter().find(|(k, _)| k == name).map(|(_, v)| v.as_str())
    }
}

type Evaluator = dyn Fn(f64, f64) -> Result<SurfacePoint> + Send + Sync;

/// An immutable frontal surface.
#[derive(Clone)]
pub struct FrontalSurface {
    domain: Domain,
    eval: Arc<Evaluator>,
    provenance: Provenance,
}

impl fmt::Debug for FrontalSurface {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FrontalSurface")
            .field("domain", &self.domain)
            .field("provenance", &self.provenance)
            .finish_non_exhaustive()
    }
}

impl FrontalSurface {
    pub fn new<F>(domain: Domain, provenance: Provenance, eval: F) -> Self
    where
        F: Fn(f64, f64) -> Result<SurfacePoint> + Send + Sync + 'static,
    {
        FrontalSurface { domain, eval: Arc::new(eval), provenance }
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn kind(&self) -> &str {
        &self.provenance.kind
    }

    /// Evaluates without a domain check (ray sampling may step just outside).
    pub fn eval_unchecked(&self, u: f64, v: f64) -> Result<SurfacePoint> {
        (self.eval)(u, v)
    }

    pub fn eval(&self, u: f64, v: f64) -> Result<SurfacePoint> {
        if !self.domain.contains(u, v) {
            return Err(Error::OutsideDomain(At(u, v)));
        }
        (self.eval)(u, v)
    }

    pub fn has_c_field(&self) -> bool {
        let (u, v) = self.domain.center();
        self.eval(u, v).map(|p| p.c.is_some()).unwrap_or(false)
    }

    pub fn with_domain(&self, domain: Domain) -> Self {
        FrontalSurface { domain, ..self.clone() }
    }

    /// Replaces the tangent moving basis by `Ω M` for a constant invertible `M`.
    pub fn rebased(&self, m: Matrix2<f64>) -> Result<Self> {
        if m.determinant().abs() <= 1e-14 {
            return Err(Error::Domain("change-of-basis matrix is singular".into()));
        }
        let inner = self.clone();
        let prov = self.provenance.clone().with("rebased", format!("{:?}", m.as_slice()));
        Ok(FrontalSurface::new(self.domain, prov, move |u, v| {
            let mut p = inner.eval_unchecked(u, v)?;
            let [w1, w2] = p.omega;
            let col = |a: f64, b: f64| -> Jet3 {
                std::array::from_fn(|k| w1[k] * a + w2[k] * b)
            };
            p.omega = [col(m[(0, 0)], m[(1, 0)]), col(m[(0, 1)], m[(1, 1)])];
            p.c = p.c.map(|c| m.transpose() * c * m);
            Ok(p)
        }))
    }

    /// Replaces the tangent moving basis by an arbitrary jet-valued field.
    pub fn with_tmb<F>(&self, omega: F) -> Self
    where
        F: Fn(f64, f64) -> Result<[Jet3; 2]> + Send + Sync + 'static,
    {
        let inner = self.clone();
        let prov = self.provenance.clone().with("tmb", "override");
        FrontalSurface::new(self.domain, prov, move |u, v| {
            let mut p = inner.eval_unchecked(u, v)?;
            p.omega = omega(u, v)?;
            p.c = None;
            p.k_bar = None;
            Ok(p)
        })
    }
}

use std::sync::Arc;

use super::{eval1, eval2, require_origin, scalar1, scalar2, Scalar2};
use crate::error::{Error, Result};
use crate::expr::{Expr, Univariate};
use crate::jets::{Jet2, Order};
use crate::quadrature::{integrate_1d, integrate_vec, DEFAULT_TOL};
use crate::surface::{Domain, FrontalSurface, Provenance, SurfacePoint};

const POINT_TOL: f64 = 1e-12;

fn one() -> Jet2 {
    Jet2::constant(Order::One, 1.0)
}

fn zero() -> Jet2 {
    Jet2::constant(Order::One, 0.0)
}

/// Rank-one front `(w, ∫λ̂ + f1, ∫ t λ̂ + f2)` with basis `[y_w | (0, 1, z)]`.
pub fn gen_rank1_front(lambda: &Expr, f1: &Univariate, f2: &Univariate, domain: Domain) -> Result<FrontalSurface> {
    domain.validate()?;
    let lam = scalar2(lambda.clone());
    let at0 = eval2(&lam, 0.0, 0.0)?.value();
    if at0.abs() > POINT_TOL {
        return Err(Error::PreconditionFailed(format!("lambda(0,0) = {at0:e}, expected 0")));
    }
    let (f1s, f2s) = (scalar1(f1.clone()), scalar1(f2.clone()));
    let prov = Provenance::new("rank1-front")
        .with("lambda", lambda)
        .with("f1", f1.expr())
        .with("f2", f2.expr());
    Ok(FrontalSurface::new(domain, prov, move |w, z| {
        let q = integrate_vec(
            |t| {
                let l = eval2(&lam, w, t)?;
                Ok([l.value(), t * l.value(), l.du(), t * l.du(), l.duu(), t * l.duu()])
            },
            0.0,
            z,
            DEFAULT_TOL,
        )?
        .value;
        let l = eval2(&lam, w, z)?;
        let a = eval1(&f1s, w)?;
        let b = eval1(&f2s, w)?;
        let x = [
            Jet2::var_u(Order::One, w),
            Jet2::first_order(q[0] + a[0], q[2] + a[1], l.value()),
            Jet2::first_order(q[1] + b[0], q[3] + b[1], z * l.value()),
        ];
        let yw = [
            one(),
            Jet2::first_order(q[2] + a[1], q[4] + a[2], l.du()),
            Jet2::first_order(q[3] + b[1], q[5] + b[2], z * l.du()),
        ];
        let col2 = [zero(), one(), Jet2::var_v(Order::One, z)];
        Ok(SurfacePoint::new(x, [yw, col2]))
    }))
}

/// Adds `w^2` to the third coordinate of a rank-one front.
///
/// Applying it twice adds `2 w^2`.
pub fn rank1_to_nonvanishing(s: &FrontalSurface) -> Result<FrontalSurface> {
    if s.kind() != "rank1-front" && s.kind() != "rank1-normalized" {
        return Err(Error::WrongGeneratorKind { expected: "rank1-front", got: s.kind().to_string() });
    }
    let inner = s.clone();
    let times = s.provenance().param("times").and_then(|t| t.parse::<u32>().ok()).unwrap_or(0) + 1;
    let mut prov = s.provenance().clone();
    prov.kind = "rank1-normalized".into();
    prov.params.retain(|(k, _)| k != "times");
    let prov = prov.with("times", times);
    Ok(FrontalSurface::new(s.domain(), prov, move |w, z| {
        let mut p = inner.eval_unchecked(w, z)?;
        p.x[2] = p.x[2] + Jet2::first_order(w * w, 2.0 * w, 0.0);
        p.omega[0][2] = p.omega[0][2] + Jet2::first_order(2.0 * w, 2.0, 0.0);
        p.c = None;
        Ok(p)
    }))
}

/// `(u, -h_v, ∫(h_u - h_uv v) du + ∫ -h_vv(0, t) t dt)` with basis `(1, 0, h_u), (0, 1, v)`.
fn from_h(h: Scalar2, domain: Domain, prov: Provenance, k_bar: Option<f64>) -> Result<FrontalSurface> {
    domain.validate()?;
    require_origin(&domain)?;
    Ok(FrontalSurface::new(domain, prov, move |u, v| {
        let hj = eval2(&h, u, v)?;
        let hu = hj.partial_u()?;
        let hv = hj.partial_v()?;
        let along_u = integrate_1d(
            |t| {
                let j = eval2(&h, t, v)?;
                Ok(j.du() - j.duv() * v)
            },
            0.0,
            u,
            DEFAULT_TOL,
        )?
        .value;
        let along_v = integrate_1d(|t| Ok(-eval2(&h, 0.0, t)?.dvv() * t), 0.0, v, DEFAULT_TOL)?.value;
        let x = [
            Jet2::var_u(Order::One, u),
            -hv,
            Jet2::first_order(along_u + along_v, hj.du() - hj.duv() * v, -v * hj.dvv()),
        ];
        let w1 = [one(), zero(), hu];
        let w2 = [zero(), one(), Jet2::var_v(Order::One, v)];
        let mut p = SurfacePoint::new(x, [w1, w2]);
        if let Some(c) = k_bar {
            let s = 1.0 + hj.du() * hj.du() + v * v;
            p.k_bar = Some(c / (s * s));
        }
        Ok(p)
    }))
}

pub fn gen_rank1_from_h(h: &Expr, domain: Domain) -> Result<FrontalSurface> {
    let prov = Provenance::new("rank1-from-h").with("h", h);
    from_h(scalar2(h.clone()), domain, prov, None)
}

/// `(u, u r1 + r2, ∫ t (u r1' + r2') dt + u c1 + c2)`, a ruled front with `K = 0`.
pub fn gen_vanishing_k(r1: &Univariate, r2: &Univariate, c1: f64, c2: f64, domain: Domain) -> Result<FrontalSurface> {
    domain.validate()?;
    let (r1s, r2s) = (scalar1(r1.clone()), scalar1(r2.clone()));
    let d0 = eval1(&r2s, 0.0)?[1];
    if d0.abs() > POINT_TOL {
        return Err(Error::PreconditionFailed(format!("r2'(0) = {d0:e}, expected 0")));
    }
    let prov = Provenance::new("vanishing-K")
        .with("r1", r1.expr())
        .with("r2", r2.expr())
        .with("c1", c1)
        .with("c2", c2)
        .with("directrix", format!("(0, {}, int_0^v t ({})' dt + {c2})", r2.expr(), r2.expr()));
    Ok(FrontalSurface::new(domain, prov, move |u, v| {
        let q = integrate_vec(
            |t| {
                let a = eval1(&r1s, t)?;
                let b = eval1(&r2s, t)?;
                Ok([t * a[1], t * b[1], a[0]])
            },
            0.0,
            v,
            DEFAULT_TOL,
        )?
        .value;
        let a = eval1(&r1s, v)?;
        let b = eval1(&r2s, v)?;
        let bv = u * a[1] + b[1];
        let x = [
            Jet2::var_u(Order::One, u),
            Jet2::first_order(u * a[0] + b[0], a[0], bv),
            Jet2::first_order(u * q[0] + q[1] + u * c1 + c2, q[0] + c1, v * bv),
        ];
        let w1 = [one(), zero(), Jet2::first_order(c1 - q[2], 0.0, -a[0])];
        let w2 = [zero(), one(), Jet2::var_v(Order::One, v)];
        Ok(SurfacePoint::new(x, [w1, w2]))
    }))
}

pub fn wave_height(c: f64, h1: &Univariate, h2: &Univariate) -> Scalar2 {
    let k = (-c).sqrt();
    let (a, b) = (scalar1(h1.clone()), scalar1(h2.clone()));
    Arc::new(move |u, v| Ok(a(v - u * k)? + b(v + u * k)?))
}

pub fn laplace_height(c: f64, f: &Expr) -> Scalar2 {
    let s = 1.0 / c.sqrt();
    let fe = f.clone();
    Arc::new(move |u, v| fe.eval_jet(u, v * s))
}

/// Wave-type solution `h = h1(v - √(-c) u) + h2(v + √(-c) u)` of `h_uu + c h_vv = 0`.
pub fn gen_extendable_k_wave(c: f64, h1: &Univariate, h2: &Univariate, domain: Domain) -> Result<FrontalSurface> {
    if !(c < 0.0) || !c.is_finite() {
        return Err(Error::PreconditionFailed(format!("wave mode needs c < 0, got {c}")));
    }
    let h = wave_height(c, h1, h2);
    let prov = Provenance::new("extendable-K-wave")
        .with("c", c)
        .with("h1", h1.expr())
        .with("h2", h2.expr());
    from_h(h, domain, prov, Some(c))
}

/// Laplace-type solution `h(u, v) = F(u, v / √c)` with `F` harmonic.
pub fn gen_extendable_k_laplace(c: f64, f: &Expr, domain: Domain) -> Result<FrontalSurface> {
    if !(c > 0.0) || !c.is_finite() {
        return Err(Error::PreconditionFailed(format!("laplace mode needs c > 0, got {c}")));
    }
    let h = laplace_height(c, f);
    domain.validate()?;
    let worst = pde_residual(&h, c, &domain, 32)?;
    if worst > 1e-8 {
        return Err(Error::HarmonicityViolated(worst));
    }
    let prov = Provenance::new("extendable-K-laplace").with("c", c).with("F", f);
    from_h(h, domain, prov, Some(c))
}

/// Largest `|h_uu + c h_vv|` over an `n x n` grid.
pub fn pde_residual(h: &Scalar2, c: f64, domain: &Domain, n: usize) -> Result<f64> {
    let mut worst = 0.0f64;
    for (u, v) in domain.grid(n, n) {
        let j = eval2(h, u, v)?;
        worst = worst.max((j.duu() + c * j.dvv()).abs());
    }
    Ok(worst)
}

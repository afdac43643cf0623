use super::{eval2, require_origin, scalar2};
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::jets::{Jet2, Order};
use crate::quadrature::{integrate_1d, DEFAULT_TOL};
use crate::surface::{Domain, FrontalSurface, Provenance, SurfacePoint};

/// Rank-zero front `(h_u, h_v, c)` with basis `(1, 0, u), (0, 1, v)` and `Λ^T = Hess h`.
pub fn gen_rank0_front(h: &Expr, domain: Domain) -> Result<FrontalSurface> {
    domain.validate()?;
    require_origin(&domain)?;
    let hs = scalar2(h.clone());
    let j0 = eval2(&hs, 0.0, 0.0)?;
    let worst = j0.duu().abs().max(j0.duv().abs()).max(j0.dvv().abs());
    if worst > 1e-12 {
        return Err(Error::PreconditionFailed(format!(
            "Hessian of h at the origin must vanish, got ({}, {}, {})",
            j0.duu(),
            j0.duv(),
            j0.dvv()
        )));
    }
    let prov = Provenance::new("rank0-front").with("h", h);
    Ok(FrontalSurface::new(domain, prov, move |u, v| {
        let hj = eval2(&hs, u, v)?;
        let along_u = integrate_1d(
            |t| {
                let j = eval2(&hs, t, v)?;
                Ok(t * j.duu() + v * j.duv())
            },
            0.0,
            u,
            DEFAULT_TOL,
        )?
        .value;
        let along_v = integrate_1d(|t| Ok(t * eval2(&hs, 0.0, t)?.dvv()), 0.0, v, DEFAULT_TOL)?.value;
        let x = [
            hj.partial_u()?,
            hj.partial_v()?,
            Jet2::first_order(
                along_u + along_v,
                u * hj.duu() + v * hj.duv(),
                u * hj.duv() + v * hj.dvv(),
            ),
        ];
        let one = Jet2::constant(Order::One, 1.0);
        let zero = Jet2::constant(Order::One, 0.0);
        let (ju, jv) = Jet2::coords(Order::One, u, v);
        Ok(SurfacePoint::new(x, [[one, zero, ju], [zero, one, jv]]))
    }))
}

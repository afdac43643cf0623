use nalgebra::{Matrix2, Vector3};

use crate::error::{At, Error, Result};
use crate::expr::Expr;
use crate::jets::{Jet2, Jet3, Order};
use crate::surface::{Domain, FrontalSurface, Provenance, SurfacePoint};

const CHECK_GRID: usize = 16;
const DET_TOL: f64 = 1e-10;

/// Immersions `y(s, t)` available as the outer map.
#[derive(Debug, Clone, PartialEq)]
pub enum Immersion {
    /// `(s, t, φ(s, t))`
    Graph(Expr),
    /// `(cos t cos s, cos t sin s, sin t)`, outward normal.
    Sphere,
}

impl Immersion {
    fn eval(&self, s: Jet2, t: Jet2) -> Result<Jet3> {
        match self {
            Immersion::Graph(phi) => Ok([s, t, phi.eval_jet(s, t)?]),
            Immersion::Sphere => {
                let (cs, ss) = (s.cos()?, s.sin()?);
                let (ct, st) = (t.cos()?, t.sin()?);
                Ok([ct * cs, ct * ss, st])
            }
        }
    }

    fn describe(&self) -> String {
        match self {
            Immersion::Graph(phi) => format!("graph({phi})"),
            Immersion::Sphere => "sphere".to_string(),
        }
    }
}

/// Composes an order-one jet in `(s, t)`, given as value and partials, with `m`.
fn chain_first(value: f64, ds: f64, dt: f64, m1: &Jet2, m2: &Jet2) -> Jet2 {
    Jet2::first_order(value, ds * m1.du() + dt * m2.du(), ds * m1.dv() + dt * m2.dv())
}

/// `x = y ∘ m` with basis `Dy(m)` and `Λ^T = Dm`.
pub fn gen_false_singularity(y: Immersion, m1: &Expr, m2: &Expr, domain: Domain) -> Result<FrontalSurface> {
    domain.validate()?;
    let inner = |u: f64, v: f64| -> Result<(Jet2, Jet2)> {
        let (ju, jv) = Jet2::coords(Order::One, u, v);
        Ok((m1.eval_jet(ju, jv)?, m2.eval_jet(ju, jv)?))
    };
    let det = |u: f64, v: f64| -> Result<f64> {
        let (a, b) = inner(u, v)?;
        Ok(a.du() * b.dv() - a.dv() * b.du())
    };
    let n = CHECK_GRID;
    for j in 0..n - 1 {
        for i in 0..n - 1 {
            let (u0, v0) = domain.node(n, n, i, j);
            let (u1, v1) = domain.node(n, n, i + 1, j + 1);
            let (uc, vc) = (0.5 * (u0 + u1), 0.5 * (v0 + v1));
            let mut flat = true;
            for (u, v) in [(u0, v0), (u1, v0), (u0, v1), (u1, v1), (uc, vc)] {
                if det(u, v)?.abs() > DET_TOL {
                    flat = false;
                    break;
                }
            }
            if flat {
                return Err(Error::NonProperComposition(At(uc, vc)));
            }
        }
    }

    let prov = Provenance::new("false-singularity")
        .with("immersion", y.describe())
        .with("m1", m1)
        .with("m2", m2);
    let (m1, m2) = (m1.clone(), m2.clone());
    Ok(FrontalSurface::new(domain, prov, move |u, v| {
        let (ju, jv) = Jet2::coords(Order::One, u, v);
        let a = m1.eval_jet(ju, jv)?;
        let b = m2.eval_jet(ju, jv)?;
        let (s, t) = Jet2::coords(Order::Two, a.value(), b.value());
        let yj = y.eval(s, t)?;
        let x: Jet3 = std::array::from_fn(|k| chain_first(yj[k].value(), yj[k].du(), yj[k].dv(), &a, &b));
        let ys: Jet3 = std::array::from_fn(|k| chain_first(yj[k].du(), yj[k].duu(), yj[k].duv(), &a, &b));
        let yt: Jet3 = std::array::from_fn(|k| chain_first(yj[k].dv(), yj[k].duv(), yj[k].dvv(), &a, &b));

        let vs = Vector3::from_fn(|k, _| yj[k].du());
        let vt = Vector3::from_fn(|k, _| yj[k].dv());
        let nrm = vs.cross(&vt);
        if nrm.norm() <= 1e-12 {
            return Err(Error::DegenerateBasis(At(u, v)));
        }
        let nv = nrm / nrm.norm();
        let second = |f: fn(&Jet2) -> f64| Vector3::from_fn(|k, _| f(&yj[k])).dot(&nv);
        let (l, m, nn) = (second(Jet2::duu), second(Jet2::duv), second(Jet2::dvv));
        let mut p = SurfacePoint::new(x, [ys, yt]);
        p.c = Some(Matrix2::new(l, m, m, nn));
        Ok(p)
    }))
}

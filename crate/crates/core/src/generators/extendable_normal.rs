use nalgebra::Matrix2;

use super::{eval1, eval2, require_origin, scalar1, scalar2, Scalar1, Scalar2};
use crate::error::Result;
use crate::expr::{Expr, Univariate};
use crate::jets::{Jet2, Order};
use crate::quadrature::{integrate_vec, DEFAULT_TOL, INNER_TOL};
use crate::surface::{Domain, FrontalSurface, Provenance, SurfacePoint};

/// Pointwise values of `b`, `h` and the derivatives the formulas need.
struct Local {
    bu: f64,
    bv: f64,
    buu: f64,
    buv: f64,
    h: f64,
    hu: f64,
    hv: f64,
    huu: f64,
}

impl Local {
    fn at(b: &Scalar2, h: &Scalar2, u: f64, v: f64) -> Result<Self> {
        let bj = eval2(b, u, v)?;
        let hj = eval2(h, u, v)?;
        Ok(Local {
            bu: bj.du(),
            bv: bj.dv(),
            buu: bj.duu(),
            buv: bj.duv(),
            h: hj.value(),
            hu: hj.du(),
            hv: hj.dv(),
            huu: hj.duu(),
        })
    }

    /// `[h b_v, (h b_v)_u, h_uu b_v + 2 h_u b_uv - h_v b_uu]`.
    fn inner_integrand(&self) -> [f64; 3] {
        [
            self.h * self.bv,
            self.hu * self.bv + self.h * self.buv,
            self.huu * self.bv + 2.0 * self.hu * self.buv - self.hv * self.buu,
        ]
    }
}

struct Gen {
    b: Scalar2,
    h: Scalar2,
    l: Scalar1,
    r: Scalar1,
}

/// `g2`, `g2_u`, `h2`, `h2_u` at `(u, t)`, sharing one inner quadrature.
struct Column {
    g2: f64,
    g2u: f64,
    h2: f64,
    h2u: f64,
}

impl Gen {
    fn column(&self, u: f64, t: f64, loc: &Local, base: &UTerms) -> Result<Column> {
        let inner = integrate_vec(
            |s| Local::at(&self.b, &self.h, u, s).map(|l| l.inner_integrand()),
            0.0,
            t,
            INNER_TOL,
        )?
        .value;
        let g2 = inner[0] + base.big_l;
        let g2u = inner[1] + base.l[0];
        let h2 = g2u - loc.h * loc.bu;
        let h2u = inner[2] - base.hbuu0 + base.l[1] - loc.hu * loc.bu;
        Ok(Column { g2, g2u, h2, h2u })
    }

    /// Terms depending on `u` alone.
    fn u_terms(&self, u: f64) -> Result<UTerms> {
        let lr = integrate_vec(
            |t| Ok([eval1(&self.l, t)?[0], eval1(&self.r, t)?[0]]),
            0.0,
            u,
            INNER_TOL,
        )?
        .value;
        // c(u, 0) = ∫ R(t) + b_u(t, 0) L(t) dt
        let c0 = integrate_vec(
            |t| {
                let inner = integrate_vec(
                    |s| Ok([eval1(&self.l, s)?[0], eval1(&self.r, s)?[0]]),
                    0.0,
                    t,
                    INNER_TOL,
                )?
                .value;
                let bu = eval2(&self.b, t, 0.0)?.du();
                Ok([inner[1] + bu * inner[0]])
            },
            0.0,
            u,
            DEFAULT_TOL,
        )?
        .value[0];
        let at0 = Local::at(&self.b, &self.h, u, 0.0)?;
        let l = eval1(&self.l, u)?;
        Ok(UTerms {
            big_l: lr[0],
            big_r: lr[1],
            l: [l[0], l[1]],
            r: eval1(&self.r, u)?[0],
            hbuu0: at0.h * at0.buu,
            c0,
        })
    }

    fn point(&self, u: f64, v: f64) -> Result<SurfacePoint> {
        let base = self.u_terms(u)?;
        let outer = integrate_vec(
            |t| {
                let loc = Local::at(&self.b, &self.h, u, t)?;
                let col = self.column(u, t, &loc, &base)?;
                Ok([
                    loc.bv * col.g2,
                    col.h2 * loc.bv,
                    col.h2u * loc.bv + col.h2 * loc.buv,
                ])
            },
            0.0,
            v,
            DEFAULT_TOL,
        )?
        .value;
        let loc = Local::at(&self.b, &self.h, u, v)?;
        let col = self.column(u, v, &loc, &base)?;

        let c = outer[0] + base.c0;
        let g1 = outer[1] + base.big_r;
        let g1u = outer[2] + base.r;
        let g1v = col.h2 * loc.bv;
        let g2 = col.g2;
        let g2u = col.g2u;
        let g2v = loc.h * loc.bv;

        let bj = eval2(&self.b, u, v)?.truncate(Order::One);
        let one = Jet2::constant(Order::One, 1.0);
        let zero = Jet2::constant(Order::One, 0.0);
        let x = [
            Jet2::var_u(Order::One, u),
            bj,
            Jet2::first_order(c, g1 + loc.bu * g2, loc.bv * g2),
        ];
        let w1 = [one, zero, Jet2::first_order(g1, g1u, g1v)];
        let w2 = [zero, one, Jet2::first_order(g2, g2u, g2v)];

        let h1 = g1u - col.h2 * loc.bu;
        let w = (1.0 + g1 * g1 + g2 * g2).sqrt();
        let cm = Matrix2::new(h1, col.h2, col.h2, loc.h) / w;
        let mut p = SurfacePoint::new(x, [w1, w2]);
        p.c = Some(cm);
        Ok(p)
    }
}

struct UTerms {
    big_l: f64,
    big_r: f64,
    l: [f64; 2],
    r: f64,
    hbuu0: f64,
    c0: f64,
}

/// Frontal `(u, b, c)` with extendable normal curvature.
///
/// Derivatives of the integral coordinate come from `c_u = g1 + b_u g2` and
/// `c_v = b_v g2`; the factor `C` with `II_Ω = C Λ^T` is attached.
pub fn gen_extendable_normal(b: &Expr, h: &Expr, l: &Univariate, r: &Univariate, domain: Domain) -> Result<FrontalSurface> {
    domain.validate()?;
    require_origin(&domain)?;
    let prov = Provenance::new("extendable-normal")
        .with("b", b)
        .with("h", h)
        .with("l", l.expr())
        .with("r", r.expr());
    let gen = Gen {
        b: scalar2(b.clone()),
        h: scalar2(h.clone()),
        l: scalar1(l.clone()),
        r: scalar1(r.clone()),
    };
    Ok(FrontalSurface::new(domain, prov, move |u, v| gen.point(u, v)))
}

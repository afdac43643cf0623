//! Pointwise invariants of a frontal relative to its tangent moving basis.

use nalgebra::{Matrix2, Matrix3x2, Vector2, Vector3};
use serde::Serialize;

use crate::error::{At, Error, Result};
use crate::linalg::{self, adj};
use crate::surface::{FrontalSurface, SurfacePoint};

/// Below this `|w1 x w2|` the basis is treated as degenerate.
pub const BASIS_TOL: f64 = 1e-12;
pub const UMBILIC_TOL: f64 = 1e-10;
pub const COMPLEX_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Serialize)]
pub struct InvariantFrame {
    pub point: (f64, f64),
    pub x: Vector3<f64>,
    pub n: Vector3<f64>,
    pub dx: Matrix3x2<f64>,
    pub dn: Matrix3x2<f64>,
    pub omega: Matrix3x2<f64>,
    pub first: Matrix2<f64>,
    pub second: Matrix2<f64>,
    pub first_omega: Matrix2<f64>,
    pub second_omega: Matrix2<f64>,
    pub lambda_m: Matrix2<f64>,
    pub mu: Matrix2<f64>,
    pub alpha: Matrix2<f64>,
    pub lambda: f64,
    pub k_omega: f64,
    pub h_omega: f64,
    /// Relative principal curvatures `k1 <= k2`, absent when the discriminant is negative.
    pub principal: Option<(f64, f64)>,
    pub c: Option<Matrix2<f64>>,
    pub k_bar: Option<f64>,
}

impl InvariantFrame {
    pub fn from_point(p: &SurfacePoint, u: f64, v: f64) -> Result<Self> {
        let at = At(u, v);
        let n_jet = p.normal(at)?;
        let dx = p.dx();
        let dn = linalg::jacobian(&n_jet);
        let omega = p.omega_matrix();
        let first = dx.transpose() * dx;
        let second = -(dx.transpose() * dn);
        let first_omega = omega.transpose() * omega;
        let second_omega = -(omega.transpose() * dn);
        let inv = first_omega
            .try_inverse()
            .ok_or(Error::DegenerateBasis(at))?;
        let lambda_m = dx.transpose() * omega * inv;
        let mu = -(second_omega.transpose() * inv);
        let alpha = mu * adj(&lambda_m);
        let lambda = lambda_m.determinant();
        let k_omega = mu.determinant();
        let h_omega = -0.5 * alpha.trace();
        let disc = h_omega * h_omega - lambda * k_omega;
        let principal = if disc >= -COMPLEX_TOL {
            let r = disc.max(0.0).sqrt();
            Some((h_omega - r, h_omega + r))
        } else {
            None
        };
        let frame = InvariantFrame {
            point: (u, v),
            x: linalg::value3(&p.x),
            n: linalg::value3(&n_jet),
            dx,
            dn,
            omega,
            first,
            second,
            first_omega,
            second_omega,
            lambda_m,
            mu,
            alpha,
            lambda,
            k_omega,
            h_omega,
            principal,
            c: p.c,
            k_bar: p.k_bar,
        };
        frame.check_finite()?;
        Ok(frame)
    }

    fn check_finite(&self) -> Result<()> {
        let ok = self.dx.iter().chain(self.dn.iter()).all(|x| x.is_finite())
            && self.lambda.is_finite()
            && self.k_omega.is_finite()
            && self.h_omega.is_finite();
        if ok {
            Ok(())
        } else {
            Err(Error::NonFinite("invariant frame"))
        }
    }

    /// `II_Ω adj(Λ^T)`, symmetric for every frontal.
    pub fn shape(&self) -> Matrix2<f64> {
        self.second_omega * adj(&self.lambda_m.transpose())
    }

    pub fn discriminant(&self) -> f64 {
        self.h_omega * self.h_omega - self.lambda * self.k_omega
    }

    /// Classical Gaussian and mean curvature from I and II; `None` at singular points.
    pub fn classical(&self) -> Option<(f64, f64)> {
        let det = self.first.determinant();
        if det.abs() <= 1e-300 || self.lambda.abs() <= crate::singular::TAU_SING {
            return None;
        }
        let inv = self.first.try_inverse()?;
        let k = self.second.determinant() / det;
        let h = 0.5 * (self.second * inv).trace();
        Some((k, h))
    }

    /// `B` with `μ = Λ B`, derived from the analytic factor `C`.
    pub fn b_from_c(&self) -> Option<Matrix2<f64>> {
        let inv = self.first_omega.try_inverse()?;
        self.c.map(|c| -(c.transpose() * inv))
    }

    /// Decomposition residuals `|Dx - Ω Λ^T|` and `|Dn - Ω μ^T|`.
    pub fn decomposition_residuals(&self) -> (f64, f64) {
        let rx = self.dx - self.omega * self.lambda_m.transpose();
        let rn = self.dn - self.omega * self.mu.transpose();
        (linalg::inf_norm32(&rx), linalg::inf_norm32(&rn))
    }
}

pub fn invariant_frame(s: &FrontalSurface, u: f64, v: f64) -> Result<InvariantFrame> {
    let p = s.eval(u, v)?;
    InvariantFrame::from_point(&p, u, v)
}

/// Frame at a point possibly just outside the domain.
pub fn invariant_frame_unchecked(s: &FrontalSurface, u: f64, v: f64) -> Result<InvariantFrame> {
    let p = s.eval_unchecked(u, v)?;
    InvariantFrame::from_point(&p, u, v)
}

pub fn relative_normal_curvature(f: &InvariantFrame, w: Vector2<f64>) -> Result<f64> {
    if w.norm() == 0.0 {
        return Err(Error::ZeroDirection);
    }
    let num = w.dot(&(f.shape() * w));
    let den = w.dot(&(f.first_omega * w));
    Ok(num / den)
}

/// Classical normal curvature in direction `z`.
pub fn normal_curvature(f: &InvariantFrame, z: Vector2<f64>) -> Result<f64> {
    if z.norm() == 0.0 {
        return Err(Error::ZeroDirection);
    }
    Ok(z.dot(&(f.second * z)) / z.dot(&(f.first * z)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PrincipalDirections {
    pub k1: f64,
    pub k2: f64,
    pub w1: Vector2<f64>,
    pub w2: Vector2<f64>,
}

/// Solves `II_Ω adj(Λ^T) w = k I_Ω w`; eigenvectors are `I_Ω`-normalized.
pub fn principal_directions(f: &InvariantFrame) -> Result<PrincipalDirections> {
    let at = At(f.point.0, f.point.1);
    let disc = f.discriminant();
    if disc < -COMPLEX_TOL {
        return Err(Error::ComplexEigen { at, disc });
    }
    let s = f.shape();
    let s = 0.5 * (s + s.transpose());
    let chol = f.first_omega.cholesky().ok_or(Error::DegenerateBasis(at))?;
    let l = chol.l();
    let linv = l.try_inverse().ok_or(Error::DegenerateBasis(at))?;
    let m = linv * s * linv.transpose();
    let (k, y) = linalg::sym_eigen(&m);
    if (k[1] - k[0]).abs() < UMBILIC_TOL {
        return Err(Error::UmbilicLike(at));
    }
    let back = linv.transpose();
    Ok(PrincipalDirections { k1: k[0], k2: k[1], w1: back * y[0], w2: back * y[1] })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jets::{Jet2, Jet3, Order};
    use crate::surface::{Domain, FrontalSurface, Provenance};
    use approx::assert_abs_diff_eq;

    fn plane() -> FrontalSurface {
        FrontalSurface::new(Domain::square(1.0), Provenance::new("plane"), |u, v| {
            let (ju, jv) = Jet2::coords(Order::One, u, v);
            let z = Jet2::constant(Order::One, 0.0);
            let one = Jet2::constant(Order::One, 1.0);
            let x: Jet3 = [ju, jv, z];
            Ok(SurfacePoint::new(x, [[one, z, z], [z, one, z]]))
        })
    }

    #[test]
    fn plane_invariants() {
        let s = plane();
        let f = invariant_frame(&s, 0.3, -0.2).unwrap();
        assert_abs_diff_eq!(f.lambda, 1.0);
        assert_abs_diff_eq!(f.k_omega, 0.0);
        assert_abs_diff_eq!(f.h_omega, 0.0);
        assert_abs_diff_eq!(f.first, Matrix2::identity());
        assert_abs_diff_eq!(f.first_omega, Matrix2::identity());
        let w = Vector2::new(0.3, 0.7);
        assert_abs_diff_eq!(relative_normal_curvature(&f, w).unwrap(), 0.0);
        assert!(matches!(relative_normal_curvature(&f, Vector2::zeros()), Err(Error::ZeroDirection)));
        assert!(matches!(principal_directions(&f), Err(Error::UmbilicLike(_))));
    }

    #[test]
    fn relative_curvature_is_homogeneous() {
        // Graph of u^2 - uv with its natural basis.
        let s = FrontalSurface::new(Domain::square(1.0), Provenance::new("graph"), |u, v| {
            let (ju, jv) = Jet2::coords(Order::Two, u, v);
            let z = ju * ju - ju * jv;
            let zu = z.partial_u()?;
            let zv = z.partial_v()?;
            let c0 = Jet2::constant(Order::One, 0.0);
            let c1 = Jet2::constant(Order::One, 1.0);
            let x = [ju.truncate(Order::One), jv.truncate(Order::One), z.truncate(Order::One)];
            Ok(SurfacePoint::new(x, [[c1, c0, zu], [c0, c1, zv]]))
        });
        let f = invariant_frame(&s, 0.2, 0.4).unwrap();
        let w = Vector2::new(0.4, -1.3);
        let a = relative_normal_curvature(&f, w).unwrap();
        let b = relative_normal_curvature(&f, 2.0 * w).unwrap();
        assert_abs_diff_eq!(a, b, epsilon = 1e-15);
        let pd = principal_directions(&f).unwrap();
        for (k, w) in [(pd.k1, pd.w1), (pd.k2, pd.w2)] {
            let r = f.shape() * w - f.first_omega * w * k;
            assert!(r.norm() <= 1e-12);
            assert_abs_diff_eq!(w.dot(&(f.first_omega * w)), 1.0, epsilon = 1e-12);
        }
        let (k1, k2) = f.principal.unwrap();
        assert_abs_diff_eq!(k1, pd.k1, epsilon = 1e-12);
        assert_abs_diff_eq!(k2, pd.k2, epsilon = 1e-12);
    }
}

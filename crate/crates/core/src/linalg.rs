//! Small fixed-size helpers on top of nalgebra.

use nalgebra::{Matrix2, Matrix3x2, Vector2, Vector3};

use crate::jets::Jet3;

pub fn adj(m: &Matrix2<f64>) -> Matrix2<f64> {
    Matrix2::new(m[(1, 1)], -m[(0, 1)], -m[(1, 0)], m[(0, 0)])
}

pub fn inf_norm2(m: &Matrix2<f64>) -> f64 {
    m.iter().fold(0.0f64, |a, x| a.max(x.abs()))
}

pub fn inf_norm32(m: &Matrix3x2<f64>) -> f64 {
    m.iter().fold(0.0f64, |a, x| a.max(x.abs()))
}

pub fn value3(j: &Jet3) -> Vector3<f64> {
    Vector3::new(j[0].value(), j[1].value(), j[2].value())
}

/// Jacobian of a jet-valued map: column 0 is the u-derivative, column 1 the v-derivative.
pub fn jacobian(j: &Jet3) -> Matrix3x2<f64> {
    Matrix3x2::new(
        j[0].du(), j[0].dv(),
        j[1].du(), j[1].dv(),
        j[2].du(), j[2].dv(),
    )
}

pub fn columns(a: &Vector3<f64>, b: &Vector3<f64>) -> Matrix3x2<f64> {
    Matrix3x2::from_columns(&[*a, *b])
}

/// Singular values of a 3x2 matrix, largest first.
pub fn singular_values(m: &Matrix3x2<f64>) -> (f64, f64) {
    let a = m.column(0).into_owned();
    let b = m.column(1).into_owned();
    let area = a.cross(&b).norm();
    let g = m.transpose() * m;
    let tr = g.trace();
    let disc = ((g[(0, 0)] - g[(1, 1)]).powi(2) + 4.0 * g[(0, 1)] * g[(1, 0)]).max(0.0);
    let smax = (0.5 * (tr + disc.sqrt())).max(0.0).sqrt();
    if smax == 0.0 {
        (0.0, 0.0)
    } else {
        (smax, area / smax)
    }
}

/// Eigen-decomposition of a symmetric 2x2 matrix: ascending eigenvalues and unit eigenvectors.
pub fn sym_eigen(m: &Matrix2<f64>) -> ([f64; 2], [Vector2<f64>; 2]) {
    let a = m[(0, 0)];
    let b = 0.5 * (m[(0, 1)] + m[(1, 0)]);
    let d = m[(1, 1)];
    let mean = 0.5 * (a + d);
    let r = (0.25 * (a - d).powi(2) + b * b).sqrt();
    let (l1, l2) = (mean - r, mean + r);
    if b.abs() <= f64::EPSILON * (a.abs() + d.abs()) {
        let e1 = Vector2::new(1.0, 0.0);
        let e2 = Vector2::new(0.0, 1.0);
        return if a <= d { ([a, d], [e1, e2]) } else { ([d, a], [e2, e1]) };
    }
    // Eigenvector for l2 computed from the better-conditioned row, the other by rotation.
    let v2 = if (a - l1).abs() >= (d - l1).abs() {
        Vector2::new(a - l1, b)
    } else {
        Vector2::new(b, d - l1)
    }
    .normalize();
    let v1 = Vector2::new(-v2.y, v2.x);
    ([l1, l2], [v1, v2])
}

//! Adaptive Gauss–Kronrod quadrature (7/15 point pair).

use crate::error::{Error, Result};

pub const DEFAULT_TOL: f64 = 1e-10;
/// Tolerance used by the inner integral of a nested quadrature.
pub const INNER_TOL: f64 = 1e-11;
pub const MAX_DEPTH: u32 = 40;
const MAX_SEGMENTS: usize = 20_000;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_5,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_48,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224,
    0.063_092_092_629_978_56,
    0.104_790_010_322_250_19,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_42,
    0.204_432_940_075_298_89,
    0.209_482_141_084_727_82,
];

const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_64,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureResult<T> {
    pub value: T,
    pub abs_error: f64,
    pub subintervals: usize,
}

struct Segment<const N: usize> {
    a: f64,
    b: f64,
    depth: u32,
    value: [f64; N],
    error: f64,
}

fn rescale_error(abserr: f64, resabs: f64, resasc: f64) -> f64 {
    let mut err = abserr;
    if resasc != 0.0 && err != 0.0 {
        err = resasc * (200.0 * err / resasc).powf(1.5).min(1.0);
    }
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * resabs);
    }
    err
}

fn qk15<const N: usize, F>(f: &F, a: f64, b: f64) -> Result<([f64; N], f64)>
where
    F: Fn(f64) -> Result<[f64; N]>,
{
    let centr = 0.5 * (a + b);
    let hlgth = 0.5 * (b - a);
    let fc = f(centr)?;
    let mut fv1 = [[0.0; N]; 7];
    let mut fv2 = [[0.0; N]; 7];
    for j in 0..7 {
        let dx = hlgth * XGK[j];
        fv1[j] = f(centr - dx)?;
        fv2[j] = f(centr + dx)?;
    }

    let mut value = [0.0; N];
    let mut worst = 0.0f64;
    for k in 0..N {
        let mut resg = fc[k] * WG[3];
        let mut resk = fc[k] * WGK[7];
        let mut resabs = resk.abs();
        for j in 0..7 {
            let s = fv1[j][k] + fv2[j][k];
            resk += WGK[j] * s;
            resabs += WGK[j] * (fv1[j][k].abs() + fv2[j][k].abs());
            if j % 2 == 1 {
                resg += WG[j / 2] * s;
            }
        }
        let reskh = 0.5 * resk;
        let mut resasc = WGK[7] * (fc[k] - reskh).abs();
        for j in 0..7 {
            resasc += WGK[j] * ((fv1[j][k] - reskh).abs() + (fv2[j][k] - reskh).abs());
        }
        let h = hlgth.abs();
        value[k] = resk * hlgth;
        let err = rescale_error(((resk - resg) * hlgth).abs(), resabs * h, resasc * h);
        worst = worst.max(err);
    }
    if value.iter().any(|x| !x.is_finite()) || !worst.is_finite() {
        return Err(Error::NonFinite("quadrature"));
    }
    Ok((value, worst))
}

/// Integrates a vector-valued integrand componentwise on a shared partition.
///
/// The error estimate is the largest componentwise estimate.
pub fn integrate_vec<const N: usize, F>(f: F, a: f64, b: f64, tol: f64) -> Result<QuadratureResult<[f64; N]>>
where
    F: Fn(f64) -> Result<[f64; N]>,
{
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::Domain(format!("integration bounds [{a}, {b}] not finite")));
    }
    if a == b {
        return Ok(QuadratureResult {
            value: [0.0; N],
            abs_error: 0.0,
            subintervals: 0,
        });
    }
    if a > b {
        let mut r = integrate_vec(f, b, a, tol)?;
        r.value.iter_mut().for_each(|x| *x = -*x);
        return Ok(r);
    }

    let (value, error) = qk15(&f, a, b)?;
    let mut segs = vec![Segment { a, b, depth: 0, value, error }];
    loop {
        let total: f64 = segs.iter().map(|s| s.error).sum();
        if total <= tol {
            let mut value = [0.0; N];
            for s in &segs {
                for k in 0..N {
                    value[k] += s.value[k];
                }
            }
            return Ok(QuadratureResult {
                value,
                abs_error: total,
                subintervals: segs.len(),
            });
        }
        let (idx, _) = segs
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
            .expect("at least one segment");
        if segs[idx].depth >= MAX_DEPTH || segs.len() >= MAX_SEGMENTS {
            return Err(Error::ToleranceNotMet { a, b, tol, estimate: total });
        }
        let s = segs.swap_remove(idx);
        let mid = 0.5 * (s.a + s.b);
        let (lv, le) = qk15(&f, s.a, mid)?;
        let (rv, re) = qk15(&f, mid, s.b)?;
        segs.push(Segment { a: s.a, b: mid, depth: s.depth + 1, value: lv, error: le });
        segs.push(Segment { a: mid, b: s.b, depth: s.depth + 1, value: rv, error: re });
    }
}

pub fn integrate_1d<F>(f: F, a: f64, b: f64, tol: f64) -> Result<QuadratureResult<f64>>
where
    F: Fn(f64) -> Result<f64>,
{
    let r = integrate_vec(|t| f(t).map(|x| [x]), a, b, tol)?;
    Ok(QuadratureResult {
        value: r.value[0],
        abs_error: r.abs_error,
        subintervals: r.subintervals,
    })
}

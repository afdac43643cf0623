//! Truncated two-variable Taylor arithmetic.
//!
//! A [`Jet2`] carries the value of a scalar function of `(u, v)` together
//! with its partial derivatives up to a fixed order (1 or 2). Arithmetic on
//! jets is exact to the stored order, so every derivative used downstream
//! (fundamental forms, `Dn`, curvature matrices) is free of truncation error.
//!
//! Coefficients are stored as `[value, ∂u, ∂v, ∂uu, ∂uv, ∂vv]`; an order-1
//! jet keeps its second-order slots at zero.

use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Order {
    One = 1,
    Two = 2,
}

impl Order {
    pub fn coeff_count(self) -> usize {
        match self {
            Order::One => 3,
            Order::Two => 6,
        }
    }
}

/// Which quantity a jet is seeded from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Seed {
    U,
    V,
    Const(f64),
}

const VAL: usize = 0;
const DU: usize = 1;
const DV: usize = 2;
const DUU: usize = 3;
const DUV: usize = 4;
const DVV: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet2 {
    order: Order,
    c: [f64; 6],
}

impl Jet2 {
    pub fn constant(order: Order, value: f64) -> Self {
        let mut c = [0.0; 6];
        c[VAL] = value;
        Self { order, c }
    }

    pub fn var_u(order: Order, u: f64) -> Self {
        let mut j = Self::constant(order, u);
        j.c[DU] = 1.0;
        j
    }

    pub fn var_v(order: Order, v: f64) -> Self {
        let mut j = Self::constant(order, v);
        j.c[DV] = 1.0;
        j
    }

    /// Seeds a coordinate or constant at `point`.
    pub fn seed(point: (f64, f64), seed: Seed, order: Order) -> Self {
        match seed {
            Seed::U => Self::var_u(order, point.0),
            Seed::V => Self::var_v(order, point.1),
            Seed::Const(c) => Self::constant(order, c),
        }
    }

    /// Both coordinate seeds at `(u, v)`.
    pub fn coords(order: Order, u: f64, v: f64) -> (Self, Self) {
        (Self::var_u(order, u), Self::var_v(order, v))
    }

    /// Builds a jet from raw coefficients. Slices of length 3 give an
    /// order-1 jet, length 6 an order-2 jet.
    pub fn from_coeffs(coeffs: &[f64]) -> Result<Self> {
        let order = match coeffs.len() {
            3 => Order::One,
            6 => Order::Two,
            n => return Err(Error::Domain(format!("jet needs 3 or 6 coefficients, got {n}"))),
        };
        let mut c = [0.0; 6];
        c[..coeffs.len()].copy_from_slice(coeffs);
        Self { order, c }.checked("from_coeffs")
    }

    /// Order-1 jet with the given value and gradient.
    pub fn first_order(value: f64, du: f64, dv: f64) -> Self {
        Self {
            order: Order::One,
            c: [value, du, dv, 0.0, 0.0, 0.0],
        }
    }

    /// Order-2 jet from a value and order-1 jets of the two partials.
    ///
    /// The mixed slot is taken from `∂v(du)`; callers are responsible for
    /// the integrability `∂v(du) = ∂u(dv)`.
    pub fn from_gradient(value: f64, du: &Jet2, dv: &Jet2) -> Self {
        Self {
            order: Order::Two,
            c: [value, du.c[VAL], dv.c[VAL], du.c[DU], du.c[DV], dv.c[DV]],
        }
    }

    pub fn order(&self) -> Order {
        self.order
    }
    pub fn value(&self) -> f64 {
        self.c[VAL]
    }
    pub fn du(&self) -> f64 {
        self.c[DU]
    }
    pub fn dv(&self) -> f64 {
        self.c[DV]
    }
    pub fn duu(&self) -> f64 {
        self.c[DUU]
    }
    pub fn duv(&self) -> f64 {
        self.c[DUV]
    }
    pub fn dvv(&self) -> f64 {
        self.c[DVV]
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.c[..self.order.coeff_count()]
    }

    pub fn truncate(self, order: Order) -> Self {
        if order >= self.order {
            return self;
        }
        let mut c = self.c;
        c[DUU] = 0.0;
        c[DUV] = 0.0;
        c[DVV] = 0.0;
        Self { order, c }
    }

    /// Order-1 jet of `∂f/∂u`. Requires an order-2 jet.
    pub fn partial_u(&self) -> Result<Self> {
        self.require(Order::Two)?;
        Ok(Self::first_order(self.c[DU], self.c[DUU], self.c[DUV]))
    }

    /// Order-1 jet of `∂f/∂v`. Requires an order-2 jet.
    pub fn partial_v(&self) -> Result<Self> {
        self.require(Order::Two)?;
        Ok(Self::first_order(self.c[DV], self.c[DUV], self.c[DVV]))
    }

    fn require(&self, order: Order) -> Result<()> {
        if self.order < order {
            return Err(Error::Domain(format!(
                "operation needs an order-{} jet, got order {}",
                order as u8, self.order as u8
            )));
        }
        Ok(())
    }

    pub fn is_finite(&self) -> bool {
        self.c.iter().all(|x| x.is_finite())
    }

    pub fn checked(self, op: &'static str) -> Result<Self> {
        if self.is_finite() {
            Ok(self)
        } else {
            Err(Error::NonFinite(op))
        }
    }

    pub fn scale(self, k: f64) -> Self {
        let mut c = self.c;
        c.iter_mut().for_each(|x| *x *= k);
        Self { order: self.order, c }
    }

    /// Chain rule for `f(self)` given `f`, `f'`, `f''` at the value.
    pub fn compose(&self, f0: f64, f1: f64, f2: f64) -> Self {
        let a = &self.c;
        let mut c = [0.0; 6];
        c[VAL] = f0;
        c[DU] = f1 * a[DU];
        c[DV] = f1 * a[DV];
        if self.order == Order::Two {
            c[DUU] = f1 * a[DUU] + f2 * a[DU] * a[DU];
            c[DUV] = f1 * a[DUV] + f2 * a[DU] * a[DV];
            c[DVV] = f1 * a[DVV] + f2 * a[DV] * a[DV];
        }
        Self { order: self.order, c }
    }

    pub fn sin(self) -> Result<Self> {
        let (s, c) = self.value().sin_cos();
        self.compose(s, c, -s).checked("sin")
    }

    pub fn cos(self) -> Result<Self> {
        let (s, c) = self.value().sin_cos();
        self.compose(c, -s, -c).checked("cos")
    }

    pub fn exp(self) -> Result<Self> {
        let e = self.value().exp();
        self.compose(e, e, e).checked("exp")
    }

    pub fn ln(self) -> Result<Self> {
        let x = self.value();
        if x <= 0.0 {
            return Err(Error::Domain(format!("log of non-positive value {x}")));
        }
        self.compose(x.ln(), 1.0 / x, -1.0 / (x * x)).checked("log")
    }

    pub fn sqrt(self) -> Result<Self> {
        let x = self.value();
        if x <= 0.0 {
            return Err(Error::Domain(format!("sqrt of non-positive value {x}")));
        }
        let r = x.sqrt();
        self.compose(r, 0.5 / r, -0.25 / (r * x)).checked("sqrt")
    }

    pub fn recip(self) -> Result<Self> {
        let x = self.value();
        if x == 0.0 {
            return Err(Error::Domain("division by a jet with zero value".into()));
        }
        let r = 1.0 / x;
        self.compose(r, -r * r, 2.0 * r * r * r).checked("div")
    }

    pub fn try_div(self, rhs: Self) -> Result<Self> {
        Ok(self * rhs.recip()?).and_then(|j| j.checked("div"))
    }

    /// Integer power. Negative exponents require a nonzero value.
    pub fn powi(self, n: i32) -> Result<Self> {
        let x = self.value();
        if n < 0 && x == 0.0 {
            return Err(Error::Domain(format!("zero raised to negative power {n}")));
        }
        let nf = n as f64;
        let f0 = x.powi(n);
        let f1 = if n == 0 { 0.0 } else { nf * x.powi(n - 1) };
        let f2 = if n == 0 || n == 1 {
            0.0
        } else {
            nf * (nf - 1.0) * x.powi(n - 2)
        };
        self.compose(f0, f1, f2).checked("powi")
    }

    /// Real power with a constant exponent. Only the principal real branch
    /// is supported: a negative base needs an integral exponent.
    pub fn powf(self, p: f64) -> Result<Self> {
        if p.fract() == 0.0 && p.abs() <= i32::MAX as f64 {
            return self.powi(p as i32);
        }
        let x = self.value();
        if x < 0.0 {
            return Err(Error::Domain(format!(
                "negative base {x} with non-integer exponent {p}"
            )));
        }
        if x == 0.0 {
            // x^p is smooth at 0 only through order 2 when p >= 2.
            let needed = if self.order == Order::Two { 2.0 } else { 1.0 };
            if p < needed {
                return Err(Error::Domain(format!(
                    "0^{p} is not differentiable to order {needed}"
                )));
            }
            return Ok(self.compose(0.0, 0.0, 0.0));
        }
        let f0 = x.powf(p);
        self.compose(f0, p * f0 / x, p * (p - 1.0) * f0 / (x * x))
            .checked("pow")
    }

    /// General power `self^rhs`. A non-constant exponent needs a positive base.
    pub fn pow(self, rhs: Self) -> Result<Self> {
        let exponent_is_constant = rhs.c[1..].iter().all(|&d| d == 0.0);
        if exponent_is_constant {
            return self.powf(rhs.value()).map(|j| j.truncate(self.order.min(rhs.order)));
        }
        if self.value() <= 0.0 {
            return Err(Error::Domain(format!(
                "non-positive base {} with variable exponent",
                self.value()
            )));
        }
        (rhs * self.ln()?).exp()
    }
}

impl Add for Jet2 {
    type Output = Jet2;
    fn add(self, rhs: Jet2) -> Jet2 {
        let order = self.order.min(rhs.order);
        let mut c = [0.0; 6];
        for (i, ci) in c.iter_mut().enumerate().take(order.coeff_count()) {
            *ci = self.c[i] + rhs.c[i];
        }
        Jet2 { order, c }
    }
}

impl Sub for Jet2 {
    type Output = Jet2;
    fn sub(self, rhs: Jet2) -> Jet2 {
        self + (-rhs)
    }
}

impl Neg for Jet2 {
    type Output = Jet2;
    fn neg(self) -> Jet2 {
        self.scale(-1.0)
    }
}

impl Mul for Jet2 {
    type Output = Jet2;
    fn mul(self, rhs: Jet2) -> Jet2 {
        let order = self.order.min(rhs.order);
        let (a, b) = (&self.c, &rhs.c);
        let mut c = [0.0; 6];
        c[VAL] = a[VAL] * b[VAL];
        c[DU] = a[DU] * b[VAL] + a[VAL] * b[DU];
        c[DV] = a[DV] * b[VAL] + a[VAL] * b[DV];
        if order == Order::Two {
            c[DUU] = a[DUU] * b[VAL] + 2.0 * a[DU] * b[DU] + a[VAL] * b[DUU];
            c[DUV] = a[DUV] * b[VAL] + a[DU] * b[DV] + a[DV] * b[DU] + a[VAL] * b[DUV];
            c[DVV] = a[DVV] * b[VAL] + 2.0 * a[DV] * b[DV] + a[VAL] * b[DVV];
        }
        Jet2 { order, c }
    }
}

impl Add<f64> for Jet2 {
    type Output = Jet2;
    fn add(mut self, rhs: f64) -> Jet2 {
        self.c[VAL] += rhs;
        self
    }
}

impl Sub<f64> for Jet2 {
    type Output = Jet2;
    fn sub(self, rhs: f64) -> Jet2 {
        self + (-rhs)
    }
}

impl Mul<f64> for Jet2 {
    type Output = Jet2;
    fn mul(self, rhs: f64) -> Jet2 {
        self.scale(rhs)
    }
}

/// 3-vectors of jets, used for `x`, the tmb columns and the normal.
pub type Jet3 = [Jet2; 3];

pub fn cross(a: &Jet3, b: &Jet3) -> Jet3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub fn dot(a: &Jet3, b: &Jet3) -> Jet2 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

//! A small expression language for the free functions of the generators.
//!
//! Grammar (whitespace insignificant):
//!
//! ```text
//! expr  := term (('+' | '-') term)*
//! term  := unary (('*' | '/') unary)*
//! unary := '-' unary | power
//! power := atom ('^' unary)?
//! atom  := number | 'u' | 'v' | func '(' expr ')' | '(' expr ')'
//! func  := sin | cos | exp | log | sqrt
//! ```
//!
//! `^` binds tighter than unary minus and is right associative. An exponent
//! written as a bare integer literal (optionally negated) parses to
//! [`Expr::IntPow`]; any other exponent is a general [`BinOp::Pow`].

use std::fmt;

use crate::error::{Error, ParseError, Result};
use crate::jets::{Jet2, Order};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Var {
    U,
    V,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Log,
    Sqrt,
}

impl Func {
    fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "exp" => Func::Exp,
            "log" => Func::Log,
            "sqrt" => Func::Sqrt,
            _ => return None,
        })
    }

    fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Var(Var),
    Num(f64),
    Neg(Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
    IntPow(Box<Expr>, i32),
}

// ---------------------------------------------------------------------------
// Lexer

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64, bool), // value, written as a bare integer
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    End,
}

fn lex(src: &str) -> std::result::Result<Vec<(Tok, usize)>, ParseError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        let tok = match c {
            b'+' => Tok::Plus,
            b'-' => Tok::Minus,
            b'*' => Tok::Star,
            b'/' => Tok::Slash,
            b'^' => Tok::Caret,
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            b'0'..=b'9' | b'.' => {
                let mut integral = true;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                if i < bytes.len() && bytes[i] == b'.' {
                    integral = false;
                    i += 1;
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                }
                if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                    let mut j = i + 1;
                    if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                        j += 1;
                    }
                    if j < bytes.len() && bytes[j].is_ascii_digit() {
                        integral = false;
                        i = j;
                        while i < bytes.len() && bytes[i].is_ascii_digit() {
                            i += 1;
                        }
                    }
                }
                let text = &src[start..i];
                let value: f64 = text.parse().map_err(|_| ParseError::InvalidNumber {
                    text: text.to_string(),
                    offset: start,
                })?;
                out.push((Tok::Num(value, integral), start));
                continue;
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push((Tok::Ident(src[start..i].to_string()), start));
                continue;
            }
            _ => {
                return Err(ParseError::Syntax {
                    offset: start,
                    expected: vec!["number".into(), "identifier".into(), "operator".into()],
                })
            }
        };
        out.push((tok, start));
        i += 1;
    }
    out.push((Tok::End, src.len()));
    Ok(out)
}

// ---------------------------------------------------------------------------
// Parser

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
}

fn operand_expected() -> Vec<String> {
    ["number", "identifier", "'('", "'-'"]
        .iter()
        .map(|s| s.to_string())
        .collect()
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn err(&self, expected: Vec<String>) -> ParseError {
        ParseError::Syntax {
            offset: self.offset(),
            expected,
        }
    }

    fn expr(&mut self) -> std::result::Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.term()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn term(&mut self) -> std::result::Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Tok::Star => BinOp::Mul,
                Tok::Slash => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.unary()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn unary(&mut self) -> std::result::Result<Expr, ParseError> {
        if *self.peek() == Tok::Minus {
            self.bump();
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> std::result::Result<Expr, ParseError> {
        let base = self.atom()?;
        if *self.peek() != Tok::Caret {
            return Ok(base);
        }
        self.bump();
        if let Some(n) = self.integer_exponent() {
            return Ok(Expr::IntPow(Box::new(base), n));
        }
        let exponent = self.unary()?;
        Ok(Expr::Binary(BinOp::Pow, Box::new(base), Box::new(exponent)))
    }

    /// Consumes `INT` or `-INT` when it forms the whole exponent.
    fn integer_exponent(&mut self) -> Option<i32> {
        let (neg, at) = match self.peek() {
            Tok::Minus => (true, self.pos + 1),
            _ => (false, self.pos),
        };
        let (value, integral) = match self.toks.get(at).map(|t| &t.0) {
            Some(Tok::Num(v, i)) => (*v, *i),
            _ => return None,
        };
        // `u^2^3` must stay right-associative through the general path.
        if !integral || value > i32::MAX as f64 || matches!(self.toks.get(at + 1).map(|t| &t.0), Some(Tok::Caret)) {
            return None;
        }
        self.pos = at;
        self.bump();
        let n = value as i32;
        Some(if neg { -n } else { n })
    }

    fn atom(&mut self) -> std::result::Result<Expr, ParseError> {
        let offset = self.offset();
        match self.bump() {
            Tok::Num(v, _) => Ok(Expr::Num(v)),
            Tok::LParen => {
                let e = self.expr()?;
                self.expect_rparen()?;
                Ok(e)
            }
            Tok::Ident(name) => match name.as_str() {
                "u" => Ok(Expr::Var(Var::U)),
                "v" => Ok(Expr::Var(Var::V)),
                other => match Func::from_name(other) {
                    Some(f) => {
                        if *self.peek() != Tok::LParen {
                            return Err(self.err(vec!["'('".into()]));
                        }
                        self.bump();
                        let arg = self.expr()?;
                        self.expect_rparen()?;
                        Ok(Expr::Call(f, Box::new(arg)))
                    }
                    None => Err(ParseError::UnknownIdentifier {
                        name: other.to_string(),
                        offset,
                    }),
                },
            },
            _ => {
                self.pos = self.toks.iter().position(|t| t.1 == offset).unwrap_or(self.pos);
                Err(ParseError::Syntax {
                    offset,
                    expected: operand_expected(),
                })
            }
        }
    }

    fn expect_rparen(&mut self) -> std::result::Result<(), ParseError> {
        if *self.peek() == Tok::RParen {
            self.bump();
            Ok(())
        } else {
            Err(self.err(vec!["')'".into(), "operator".into()]))
        }
    }
}

impl Expr {
    pub fn parse(text: &str) -> std::result::Result<Expr, ParseError> {
        let toks = lex(text)?;
        let mut p = Parser { toks, pos: 0 };
        let e = p.expr()?;
        if *p.peek() != Tok::End {
            return Err(p.err(vec!["operator".into(), "end of input".into()]));
        }
        Ok(e)
    }

    /// Evaluates the expression on jet arguments.
    pub fn eval_jet(&self, u: Jet2, v: Jet2) -> Result<Jet2> {
        let order = u.order().min(v.order());
        let j = match self {
            Expr::Var(Var::U) => u,
            Expr::Var(Var::V) => v,
            Expr::Num(c) => Jet2::constant(order, *c),
            Expr::Neg(a) => -a.eval_jet(u, v)?,
            Expr::Binary(op, a, b) => {
                let a = a.eval_jet(u, v)?;
                let b = b.eval_jet(u, v)?;
                match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div => a.try_div(b)?,
                    BinOp::Pow => a.pow(b)?,
                }
            }
            Expr::Call(f, a) => {
                let a = a.eval_jet(u, v)?;
                match f {
                    Func::Sin => a.sin()?,
                    Func::Cos => a.cos()?,
                    Func::Exp => a.exp()?,
                    Func::Log => a.ln()?,
                    Func::Sqrt => a.sqrt()?,
                }
            }
            Expr::IntPow(a, n) => a.eval_jet(u, v)?.powi(*n)?,
        };
        j.checked("expression")
    }

    /// Convenience: jet of the expression with coordinate seeds at `(u, v)`.
    pub fn jet_at(&self, u: f64, v: f64, order: Order) -> Result<Jet2> {
        let (ju, jv) = Jet2::coords(order, u, v);
        self.eval_jet(ju, jv)
    }

    /// Plain scalar tree walk, independent of the jet kernel.
    pub fn eval(&self, u: f64, v: f64) -> Result<f64> {
        let x = match self {
            Expr::Var(Var::U) => u,
            Expr::Var(Var::V) => v,
            Expr::Num(c) => *c,
            Expr::Neg(a) => -a.eval(u, v)?,
            Expr::Binary(op, a, b) => {
                let a = a.eval(u, v)?;
                let b = b.eval(u, v)?;
                match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div => {
                        if b == 0.0 {
                            return Err(Error::Domain("division by zero".into()));
                        }
                        a / b
                    }
                    BinOp::Pow => {
                        if a < 0.0 && b.fract() != 0.0 {
                            return Err(Error::Domain(format!(
                                "negative base {a} with non-integer exponent {b}"
                            )));
                        }
                        a.powf(b)
                    }
                }
            }
            Expr::Call(f, a) => {
                let a = a.eval(u, v)?;
                match f {
                    Func::Sin => a.sin(),
                    Func::Cos => a.cos(),
                    Func::Exp => a.exp(),
                    Func::Log if a <= 0.0 => {
                        return Err(Error::Domain(format!("log of non-positive value {a}")))
                    }
                    Func::Log => a.ln(),
                    Func::Sqrt if a <= 0.0 => {
                        return Err(Error::Domain(format!("sqrt of non-positive value {a}")))
                    }
                    Func::Sqrt => a.sqrt(),
                }
            }
            Expr::IntPow(a, n) => {
                let a = a.eval(u, v)?;
                if a == 0.0 && *n < 0 {
                    return Err(Error::Domain("zero raised to a negative power".into()));
                }
                a.powi(*n)
            }
        };
        if x.is_finite() {
            Ok(x)
        } else {
            Err(Error::NonFinite("expression"))
        }
    }

    pub fn uses(&self, var: Var) -> bool {
        match self {
            Expr::Var(v) => *v == var,
            Expr::Num(_) => false,
            Expr::Neg(a) | Expr::Call(_, a) | Expr::IntPow(a, _) => a.uses(var),
            Expr::Binary(_, a, b) => a.uses(var) || b.uses(var),
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Binary(BinOp::Add | BinOp::Sub, ..) => 1,
            Expr::Binary(BinOp::Mul | BinOp::Div, ..) => 2,
            Expr::Neg(_) => 3,
            Expr::Binary(BinOp::Pow, ..) | Expr::IntPow(..) => 4,
            Expr::Var(_) | Expr::Num(_) | Expr::Call(..) => 5,
        }
    }
}

fn write_operand(f: &mut fmt::Formatter<'_>, e: &Expr, parens: bool) -> fmt::Result {
    if parens {
        write!(f, "({e})")
    } else {
        write!(f, "{e}")
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Var(Var::U) => write!(f, "u"),
            Expr::Var(Var::V) => write!(f, "v"),
            // Debug keeps a trailing ".0" on integral values, so a literal
            // never reparses as an integer exponent.
            Expr::Num(c) => write!(f, "{c:?}"),
            Expr::Neg(a) => {
                write!(f, "-")?;
                write_operand(f, a, a.precedence() < 3)
            }
            Expr::Binary(op, a, b) => {
                let p = self.precedence();
                let sym = match op {
                    BinOp::Add => " + ",
                    BinOp::Sub => " - ",
                    BinOp::Mul => " * ",
                    BinOp::Div => " / ",
                    BinOp::Pow => "^",
                };
                if *op == BinOp::Pow {
                    write_operand(f, a, a.precedence() < 5)?;
                    write!(f, "{sym}")?;
                    write_operand(f, b, b.precedence() < 5)
                } else {
                    write_operand(f, a, a.precedence() < p)?;
                    write!(f, "{sym}")?;
                    write_operand(f, b, b.precedence() <= p)
                }
            }
            Expr::Call(func, a) => write!(f, "{}({a})", func.name()),
            Expr::IntPow(a, n) => {
                write_operand(f, a, a.precedence() < 5)?;
                write!(f, "^{n}")
            }
        }
    }
}

/// A function of one variable written with `u` or `v` as its argument.
#[derive(Debug, Clone, PartialEq)]
pub struct Univariate {
    expr: Expr,
}

impl Univariate {
    pub fn new(expr: Expr) -> Result<Self> {
        if expr.uses(Var::U) && expr.uses(Var::V) {
            return Err(Error::NotUnivariate(expr.to_string()));
        }
        Ok(Self { expr })
    }

    pub fn parse(text: &str) -> Result<Self> {
        Self::new(Expr::parse(text)?)
    }

    /// Evaluates `f(s)` for a jet argument `s`.
    pub fn eval_jet(&self, s: Jet2) -> Result<Jet2> {
        self.expr.eval_jet(s, s)
    }

    pub fn expr(&self) -> &Expr {
        &self.expr
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn p(s: &str) -> Expr {
        Expr::parse(s).unwrap()
    }

    #[test]
    fn arithmetic_and_precedence() {
        assert_abs_diff_eq!(p("2*v^4 + 2*v").eval(0.0, 0.5).unwrap(), 1.125);
        assert_abs_diff_eq!(p("u+v*u").eval(2.0, 3.0).unwrap(), 8.0);
        assert_abs_diff_eq!(p("-u^2").eval(3.0, 0.0).unwrap(), -9.0);
        assert_abs_diff_eq!(p("2^3^2").eval(0.0, 0.0).unwrap(), 512.0);
        assert_abs_diff_eq!(p("8/4/2").eval(0.0, 0.0).unwrap(), 1.0);
        assert_abs_diff_eq!(p("1-2-3").eval(0.0, 0.0).unwrap(), -4.0);
        assert_abs_diff_eq!(p("u^-2").eval(2.0, 0.0).unwrap(), 0.25);
        assert_abs_diff_eq!(p(" 1.5e1 + .5 ").eval(0.0, 0.0).unwrap(), 15.5);
    }

    #[test]
    fn syntax_error_offset() {
        let e = Expr::parse("u + * v").unwrap_err();
        assert_eq!(e.offset(), 4);
        assert!(matches!(e, ParseError::Syntax { ref expected, .. } if expected.contains(&"number".to_string())));
        assert!(matches!(Expr::parse("u + w"), Err(ParseError::UnknownIdentifier { offset: 4, .. })));
        assert!(Expr::parse("sin u").is_err());
        assert!(Expr::parse("(u").is_err());
        assert!(Expr::parse("u v").is_err());
        assert!(Expr::parse("").is_err());
    }

    #[test]
    fn integer_exponents() {
        assert_eq!(p("u^3"), Expr::IntPow(Box::new(Expr::Var(Var::U)), 3));
        assert_eq!(p("u^-1"), Expr::IntPow(Box::new(Expr::Var(Var::U)), -1));
        assert!(matches!(p("u^3.0"), Expr::Binary(BinOp::Pow, ..)));
        assert!(matches!(p("u^(1/2)"), Expr::Binary(BinOp::Pow, ..)));
    }

    #[test]
    fn example_height_function_at_origin() {
        // Central-difference oracle on the scalar walk.
        let e = p("-3*u*v / (2*(1+v^3)^3)");
        let h = 1e-5;
        let du = (e.eval(h, 0.0).unwrap() - e.eval(-h, 0.0).unwrap()) / (2.0 * h);
        let dv = (e.eval(0.0, h).unwrap() - e.eval(0.0, -h).unwrap()) / (2.0 * h);
        let j = e.jet_at(0.0, 0.0, Order::Two).unwrap();
        assert_abs_diff_eq!(j.value(), 0.0);
        assert_abs_diff_eq!(j.du(), du, epsilon = 1e-9);
        assert_abs_diff_eq!(j.dv(), dv, epsilon = 1e-9);
    }

    #[test]
    fn sqrt_of_negative_is_domain_error() {
        assert!(matches!(p("sqrt(u)").jet_at(-1.0, 0.0, Order::One), Err(Error::Domain(_))));
        assert!(matches!(p("sqrt(u)").eval(-1.0, 0.0), Err(Error::Domain(_))));
        assert!(matches!(p("(u - 3)^0.5").jet_at(1.0, 0.0, Order::One), Err(Error::Domain(_))));
    }

    #[test]
    fn pythagorean_identity_has_zero_derivatives() {
        let e = p("sin(u)^2 + cos(u)^2");
        for &u in &[-2.0, 0.0, 0.7, 3.1] {
            let j = e.jet_at(u, 0.3, Order::Two).unwrap();
            assert_abs_diff_eq!(j.value(), 1.0, epsilon = 1e-12);
            for d in &j.coeffs()[1..] {
                assert_abs_diff_eq!(*d, 0.0, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn print_examples_reparse() {
        for s in ["-3*u*v / (2*(1+v^3)^3)", "u - (v - u)", "-(u+v)^2", "2^3^2", "(u^2)^3", "exp(-u)/sqrt(1+v^2)", "u^-2", "(-u)^3"] {
            let e = p(s);
            assert_eq!(p(&e.to_string()), e, "{s} printed as {e}");
        }
    }

    #[test]
    fn univariate_guard() {
        assert!(Univariate::parse("u^3/6").is_ok());
        assert!(Univariate::parse("v^2").is_ok());
        assert!(matches!(Univariate::parse("u*v"), Err(Error::NotUnivariate(_))));
        let f = Univariate::parse("v^3/6").unwrap();
        let j = f.eval_jet(Jet2::var_u(Order::Two, 2.0)).unwrap();
        assert_abs_diff_eq!(j.value(), 8.0 / 6.0);
        assert_abs_diff_eq!(j.du(), 2.0);
        assert_abs_diff_eq!(j.duu(), 2.0);
    }
}

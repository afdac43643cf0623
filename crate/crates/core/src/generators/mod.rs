//! Constructors of frontal surfaces from representation formulas.

mod extendable_normal;
mod false_singularity;
mod rank0;
mod rank1;

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::{Expr, Univariate, Var};
use crate::jets::{Jet2, Order};
use crate::surface::{Domain, FrontalSurface};

pub use extendable_normal::gen_extendable_normal;
pub use false_singularity::{gen_false_singularity, Immersion};
pub use rank0::gen_rank0_front;
pub use rank1::{
    gen_extendable_k_laplace, gen_extendable_k_wave, gen_rank1_from_h, gen_rank1_front, gen_vanishing_k,
    laplace_height, pde_residual, rank1_to_nonvanishing, wave_height,
};

/// A scalar function of `(u, v)` evaluated on jets.
pub type Scalar2 = Arc<dyn Fn(Jet2, Jet2) -> Result<Jet2> + Send + Sync>;
/// A scalar function of one variable evaluated on jets.
pub type Scalar1 = Arc<dyn Fn(Jet2) -> Result<Jet2> + Send + Sync>;

pub fn scalar2(e: Expr) -> Scalar2 {
    Arc::new(move |u, v| e.eval_jet(u, v))
}

pub fn scalar1(f: Univariate) -> Scalar1 {
    Arc::new(move |s| f.eval_jet(s))
}

/// Value and derivatives of `f` at `t`, up to second order.
pub(crate) fn eval1(f: &Scalar1, t: f64) -> Result<[f64; 3]> {
    let j = f(Jet2::var_u(Order::Two, t))?;
    Ok([j.value(), j.du(), j.duu()])
}

pub(crate) fn eval2(f: &Scalar2, u: f64, v: f64) -> Result<Jet2> {
    let (ju, jv) = Jet2::coords(Order::Two, u, v);
    f(ju, jv)
}

pub(crate) fn require_origin(domain: &Domain) -> Result<()> {
    if domain.contains_origin_interior() {
        Ok(())
    } else {
        Err(Error::PreconditionFailed(format!("origin must lie inside the domain {domain}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GeneratorKind {
    #[serde(rename = "extendable-normal")]
    ExtendableNormal,
    #[serde(rename = "rank1-front")]
    Rank1Front,
    #[serde(rename = "rank1-from-h")]
    Rank1FromH,
    #[serde(rename = "vanishing-K")]
    VanishingK,
    #[serde(rename = "extendable-K-wave")]
    ExtendableKWave,
    #[serde(rename = "extendable-K-laplace")]
    ExtendableKLaplace,
    #[serde(rename = "rank0-front")]
    Rank0Front,
    #[serde(rename = "false-singularity")]
    FalseSingularity,
    #[serde(rename = "rank1-normalized")]
    Rank1Normalized,
}

impl GeneratorKind {
    pub const ALL: [GeneratorKind; 9] = [
        GeneratorKind::ExtendableNormal,
        GeneratorKind::Rank1Front,
        GeneratorKind::Rank1FromH,
        GeneratorKind::VanishingK,
        GeneratorKind::ExtendableKWave,
        GeneratorKind::ExtendableKLaplace,
        GeneratorKind::Rank0Front,
        GeneratorKind::FalseSingularity,
        GeneratorKind::Rank1Normalized,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            GeneratorKind::ExtendableNormal => "extendable-normal",
            GeneratorKind::Rank1Front => "rank1-front",
            GeneratorKind::Rank1FromH => "rank1-from-h",
            GeneratorKind::VanishingK => "vanishing-K",
            GeneratorKind::ExtendableKWave => "extendable-K-wave",
            GeneratorKind::ExtendableKLaplace => "extendable-K-laplace",
            GeneratorKind::Rank0Front => "rank0-front",
            GeneratorKind::FalseSingularity => "false-singularity",
            GeneratorKind::Rank1Normalized => "rank1-normalized",
        }
    }

    /// Required and optional parameter names.
    fn params(self) -> (&'static [&'static str], &'static [&'static str]) {
        match self {
            GeneratorKind::ExtendableNormal => (&["b", "h", "l", "r"], &[]),
            GeneratorKind::Rank1Front => (&["lambda"], &["f1", "f2"]),
            GeneratorKind::Rank1FromH => (&["h"], &[]),
            GeneratorKind::VanishingK => (&["r1", "r2"], &["c1", "c2"]),
            GeneratorKind::ExtendableKWave => (&["c", "h1", "h2"], &[]),
            GeneratorKind::ExtendableKLaplace => (&["c", "F"], &[]),
            GeneratorKind::Rank0Front => (&["h"], &[]),
            GeneratorKind::FalseSingularity => (&["immersion", "m1", "m2"], &["phi"]),
            GeneratorKind::Rank1Normalized => (&["base"], &["times"]),
        }
    }
}

impl fmt::Display for GeneratorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A parameter value: a number, an expression string, or a nested spec.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Param {
    Number(f64),
    Text(String),
    Spec(Box<GeneratorSpec>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorSpec {
    pub kind: GeneratorKind,
    #[serde(default)]
    pub params: BTreeMap<String, Param>,
    pub domain: Domain,
}

impl GeneratorSpec {
    pub fn new(kind: GeneratorKind, domain: Domain) -> Self {
        GeneratorSpec { kind, params: BTreeMap::new(), domain }
    }

    pub fn with(mut self, name: &str, value: &str) -> Self {
        self.params.insert(name.to_string(), Param::Text(value.to_string()));
        self
    }

    pub fn with_number(mut self, name: &str, value: f64) -> Self {
        self.params.insert(name.to_string(), Param::Number(value));
        self
    }

    pub fn with_spec(mut self, name: &str, spec: GeneratorSpec) -> Self {
        self.params.insert(name.to_string(), Param::Spec(Box::new(spec)));
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.domain.validate()?;
        let (required, optional) = self.kind.params();
        for name in required {
            if !self.params.contains_key(*name) {
                return Err(Error::InvalidSpec(format!("{} requires parameter `{name}`", self.kind)));
            }
        }
        for name in self.params.keys() {
            if !required.contains(&name.as_str()) && !optional.contains(&name.as_str()) {
                return Err(Error::InvalidSpec(format!("{} has no parameter `{name}`", self.kind)));
            }
        }
        Ok(())
    }

    fn missing(&self, name: &str) -> Error {
        Error::InvalidSpec(format!("{} requires parameter `{name}`", self.kind))
    }

    fn get(&self, name: &str) -> Result<&Param> {
        self.params.get(name).ok_or_else(|| self.missing(name))
    }

    pub fn expr(&self, name: &str) -> Result<Expr> {
        self.expr_or(name, None)
    }

    fn expr_or(&self, name: &str, default: Option<&str>) -> Result<Expr> {
        match (self.params.get(name), default) {
            (Some(Param::Number(x)), _) => Ok(Expr::Num(*x)),
            (Some(Param::Text(s)), _) => Ok(Expr::parse(s)?),
            (Some(Param::Spec(_)), _) => {
                Err(Error::InvalidSpec(format!("parameter `{name}` must be an expression")))
            }
            (None, Some(d)) => Ok(Expr::parse(d)?),
            (None, None) => Err(self.missing(name)),
        }
    }

    pub fn univariate(&self, name: &str) -> Result<Univariate> {
        Univariate::new(self.expr(name)?)
    }

    fn univariate_or(&self, name: &str, default: &str) -> Result<Univariate> {
        Univariate::new(self.expr_or(name, Some(default))?)
    }

    pub fn number(&self, name: &str) -> Result<f64> {
        match self.params.get(name) {
            Some(Param::Number(x)) => Ok(*x),
            Some(Param::Text(s)) => {
                let e = Expr::parse(s)?;
                if e.uses(Var::U) || e.uses(Var::V) {
                    return Err(Error::InvalidSpec(format!("parameter `{name}` must be a constant")));
                }
                e.eval(0.0, 0.0)
            }
            Some(Param::Spec(_)) => Err(Error::InvalidSpec(format!("parameter `{name}` must be a number"))),
            None => Err(self.missing(name)),
        }
    }

    fn number_or(&self, name: &str, default: f64) -> Result<f64> {
        if self.params.contains_key(name) {
            self.number(name)
        } else {
            Ok(default)
        }
    }

    fn text(&self, name: &str) -> Result<&str> {
        match self.get(name)? {
            Param::Text(s) => Ok(s),
            _ => Err(Error::InvalidSpec(format!("parameter `{name}` must be a string"))),
        }
    }

    /// The height function `h` and constant `c` of an extendable-K spec.
    pub fn height(&self) -> Result<Option<(Scalar2, f64)>> {
        Ok(match self.kind {
            GeneratorKind::ExtendableKWave => {
                let c = self.number("c")?;
                Some((wave_height(c, &self.univariate("h1")?, &self.univariate("h2")?), c))
            }
            GeneratorKind::ExtendableKLaplace => {
                let c = self.number("c")?;
                Some((laplace_height(c, &self.expr("F")?), c))
            }
            _ => None,
        })
    }

    /// Builds the surface described by this spec.
    pub fn build(&self) -> Result<FrontalSurface> {
        self.validate()?;
        let d = self.domain;
        match self.kind {
            GeneratorKind::ExtendableNormal => gen_extendable_normal(
                &self.expr("b")?,
                &self.expr("h")?,
                &self.univariate("l")?,
                &self.univariate("r")?,
                d,
            ),
            GeneratorKind::Rank1Front => gen_rank1_front(
                &self.expr("lambda")?,
                &self.univariate_or("f1", "0")?,
                &self.univariate_or("f2", "0")?,
                d,
            ),
            GeneratorKind::Rank1FromH => gen_rank1_from_h(&self.expr("h")?, d),
            GeneratorKind::VanishingK => gen_vanishing_k(
                &self.univariate("r1")?,
                &self.univariate("r2")?,
                self.number_or("c1", 0.0)?,
                self.number_or("c2", 0.0)?,
                d,
            ),
            GeneratorKind::ExtendableKWave => gen_extendable_k_wave(
                self.number("c")?,
                &self.univariate("h1")?,
                &self.univariate("h2")?,
                d,
            ),
            GeneratorKind::ExtendableKLaplace => gen_extendable_k_laplace(self.number("c")?, &self.expr("F")?, d),
            GeneratorKind::Rank0Front => gen_rank0_front(&self.expr("h")?, d),
            GeneratorKind::FalseSingularity => {
                let immersion = match self.text("immersion")? {
                    "sphere" => Immersion::Sphere,
                    "graph" => Immersion::Graph(self.expr("phi")?),
                    other => {
                        return Err(Error::InvalidSpec(format!(
                            "unknown immersion `{other}` (expected `graph` or `sphere`)"
                        )))
                    }
                };
                gen_false_singularity(immersion, &self.expr("m1")?, &self.expr("m2")?, d)
            }
            GeneratorKind::Rank1Normalized => {
                let base = match self.get("base")? {
                    Param::Spec(s) => s,
                    _ => return Err(Error::InvalidSpec("parameter `base` must be a generator spec".into())),
                };
                let times = self.number_or("times", 1.0)?;
                if times < 1.0 || times.fract() != 0.0 {
                    return Err(Error::InvalidSpec("`times` must be a positive integer".into()));
                }
                let mut s = base.build()?;
                for _ in 0..times as u32 {
                    s = rank1_to_nonvanishing(&s)?;
                }
                Ok(s.with_domain(d))
            }
        }
    }
}

//! Run configuration: one generator, a grid and a list of requested outputs.

use std::path::Path;
use std::sync::Arc;

use frontal_core::expr::Expr;
use frontal_core::extend::Mode;
use frontal_core::jets::{Jet2, Jet3, Order};
use frontal_core::{FrontalSurface, GeneratorSpec};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub generator: GeneratorSpec,
    /// `[n, m]` nodes along u and v.
    #[serde(default = "default_grid")]
    pub grid: [usize; 2],
    #[serde(default)]
    pub outputs: Vec<Output>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tmb_override: Option<TmbOverride>,
}

fn default_grid() -> [usize; 2] {
    [33, 33]
}

fn default_step() -> f64 {
    frontal_core::curves::DEFAULT_STEP
}

fn default_steps() -> usize {
    200
}

fn default_eps() -> f64 {
    frontal_core::parallel::DEFAULT_EPS
}

/// Replacement basis columns, each three expressions in `u, v`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TmbOverride {
    pub w1: [String; 3],
    pub w2: [String; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Output {
    Mesh,
    Fields,
    SingularSet,
    Classify {
        points: Vec<[f64; 2]>,
    },
    Extendability {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        mode: Option<Mode>,
    },
    Trace {
        field: String,
        seeds: Vec<[f64; 2]>,
        #[serde(default = "default_step")]
        step: f64,
        #[serde(default = "default_steps")]
        steps: usize,
        /// Chart center for the field construction; the domain center if absent.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        center: Option<[f64; 2]>,
    },
    Smoothable {
        point: [f64; 2],
        #[serde(default = "default_eps")]
        eps: f64,
    },
}

impl Output {
    pub fn name(&self) -> &'static str {
        match self {
            Output::Mesh => "mesh",
            Output::Fields => "fields",
            Output::SingularSet => "singular-set",
            Output::Classify { .. } => "classify",
            Output::Extendability { .. } => "extendability",
            Output::Trace { .. } => "trace",
            Output::Smoothable { .. } => "smoothable",
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Validation(format!("cannot read config: {e}")))?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> CliResult<Self> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| CliError::Validation(format!("invalid config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> CliResult<()> {
        self.generator.validate().map_err(CliError::validation)?;
        let d = self.generator.domain;
        d.validate().map_err(CliError::validation)?;
        let [n, m] = self.grid;
        if n < 2 || m < 2 {
            return Err(CliError::Validation(format!("grid must be at least 2x2, got {n}x{m}")));
        }
        let inside = |what: &str, p: &[f64; 2]| {
            if d.contains(p[0], p[1]) {
                Ok(())
            } else {
                Err(CliError::Validation(format!("{what} ({}, {}) lies outside the domain {d}", p[0], p[1])))
            }
        };
        for out in &self.outputs {
            match out {
                Output::Classify { points } => points.iter().try_for_each(|p| inside("classify point", p))?,
                Output::Trace { field, seeds, step, center, .. } => {
                    if frontal_core::curves::FieldKind::parse(field).is_none_or(|k| k.as_str() == "custom") {
                        return Err(CliError::Validation(format!(
                            "unknown field kind `{field}` (expected asymptotic-1, asymptotic-2, curvature-line-1 or curvature-line-2)"
                        )));
                    }
                    if !(*step > 0.0) || !step.is_finite() {
                        return Err(CliError::Validation(format!("trace step must be positive, got {step}")));
                    }
                    seeds.iter().try_for_each(|p| inside("seed", p))?;
                    if let Some(c) = center {
                        inside("chart center", c)?;
                    }
                }
                Output::Smoothable { point, eps } => {
                    inside("smoothable point", point)?;
                    if !(*eps > 0.0) {
                        return Err(CliError::Validation(format!("smoothable eps must be positive, got {eps}")));
                    }
                }
                _ => {}
            }
        }
        if let Some(t) = &self.tmb_override {
            for s in t.w1.iter().chain(&t.w2) {
                Expr::parse(s).map_err(|e| CliError::Validation(format!("tmb_override `{s}`: {e}")))?;
            }
        }
        Ok(())
    }

    /// Builds the generator and applies the basis override, if any.
    pub fn surface(&self) -> CliResult<FrontalSurface> {
        let s = self.generator.build().map_err(CliError::validation)?;
        let Some(t) = &self.tmb_override else { return Ok(s) };
        let parse = |col: &[String; 3]| -> CliResult<[Expr; 3]> {
            let v: Vec<Expr> = col.iter().map(|e| Expr::parse(e)).collect::<Result<_, _>>().map_err(CliError::validation)?;
            Ok([v[0].clone(), v[1].clone(), v[2].clone()])
        };
        let cols = Arc::new([parse(&t.w1)?, parse(&t.w2)?]);
        Ok(s.with_tmb(move |u, v| {
            let (ju, jv) = Jet2::coords(Order::One, u, v);
            let col = |k: usize| -> frontal_core::Result<Jet3> {
                Ok([cols[k][0].eval_jet(ju, jv)?, cols[k][1].eval_jet(ju, jv)?, cols[k][2].eval_jet(ju, jv)?])
            };
            Ok([col(0)?, col(1)?])
        }))
    }
}

use std::fmt;

/// Errors raised while parsing a generator expression.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ParseError {
    #[error("syntax error at byte {offset}: expected one of {}", expected.join(", "))]
    Syntax { offset: usize, expected: Vec<String> },
    #[error("unknown identifier `{name}` at byte {offset}")]
    UnknownIdentifier { name: String, offset: usize },
    #[error("invalid number `{text}` at byte {offset}")]
    InvalidNumber { text: String, offset: usize },
}

impl ParseError {
    pub fn offset(&self) -> usize {
        match self {
            ParseError::Syntax { offset, .. }
            | ParseError::UnknownIdentifier { offset, .. }
            | ParseError::InvalidNumber { offset, .. } => *offset,
        }
    }
}

/// A parameter-space point, used to tag errors with where they happened.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct At(pub f64, pub f64);

impl fmt::Display for At {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.0, self.1)
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("non-finite value produced by {0}")]
    NonFinite(&'static str),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("expression uses both u and v but was declared univariate: `{0}`")]
    NotUnivariate(String),
    #[error("quadrature did not reach tolerance {tol:e} (estimate {estimate:e}) on [{a}, {b}]")]
    ToleranceNotMet { a: f64, b: f64, tol: f64, estimate: f64 },
    #[error("tangent moving basis degenerate at {0}: |w1 x w2| <= 1e-12")]
    DegenerateBasis(At),
    #[error("zero direction vector")]
    ZeroDirection,
    #[error("relative principal curvatures coincide at {0}; principal directions undefined")]
    UmbilicLike(At),
    #[error("principal curvature discriminant {disc:e} is negative at {at}")]
    ComplexEigen { at: At, disc: f64 },
    #[error("not a proper frontal: grid cell around {0} is entirely singular")]
    NotProperFrontal(At),
    #[error("normal curvature is not extendable: {0}")]
    NotExtendable(String),
    #[error("precondition failed: {0}")]
    PreconditionFailed(String),
    #[error("parameter is not harmonic: max |F_uu + F_vv| = {0:e}")]
    HarmonicityViolated(f64),
    #[error("inner map has identically vanishing Jacobian on the grid cell around {0}")]
    NonProperComposition(At),
    #[error("operation requires a {expected} surface, got {got}")]
    WrongGeneratorKind { expected: &'static str, got: String },
    #[error("extended Gaussian curvature {value:e} is not negative at {at}")]
    NonNegativeCurvature { at: At, value: f64 },
    #[error("extended principal curvatures coincide (discriminant {disc:e}) at {at}")]
    UmbilicChart { at: At, disc: f64 },
    #[error("could not find a chart around {0} on which one factorization branch holds")]
    BranchUndetermined(At),
    #[error("point {0} lies outside the surface domain")]
    OutsideDomain(At),
    #[error("invalid generator spec: {0}")]
    InvalidSpec(String),
}

pub type Result<T> = std::result::Result<T, Error>;

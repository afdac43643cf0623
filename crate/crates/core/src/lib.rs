//! Frontal surfaces: construction from representation formulas, relative
//! curvature invariants, singularities, extendability and curve tracing.

pub mod checks;
pub mod curves;
pub mod error;
pub mod expr;
pub mod extend;
pub mod frame;
pub mod generators;
pub mod jets;
pub mod linalg;
pub mod parallel;
pub mod quadrature;
pub mod singular;
pub mod surface;

pub use error::{At, Error, ParseError, Result};
pub use frame::{invariant_frame, principal_directions, relative_normal_curvature, InvariantFrame};
pub use generators::{GeneratorKind, GeneratorSpec};
pub use jets::{Jet2, Order};
pub use singular::{classify_singularity, singular_set, FrontType, SingularityReport};
pub use surface::{Domain, FrontalSurface, SurfacePoint};

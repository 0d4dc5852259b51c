//! Canal hypersurfaces generated by non-null curves with a parallel (Bishop)
//! frame in Minkowski space-time `E⁴₁`.
//!
//! The crate is organised bottom-up:
//!
//! * [`minkowski`]: the indefinite inner product, the ternary vector
//!   product, causal characters and Lorentz orthonormalization.
//! * [`spine`]: the four Bishop frame systems and spine curves evaluated
//!   either in closed form or by RK4 integration.
//! * [`canal`]: the eight canal hypersurface parametrizations, their sign
//!   tables, closed-form Gauss maps and envelope diagnostics.
//! * [`diffgeo`]: a generic numerical engine for any parametrized
//!   hypersurface (fundamental forms, shape operator, curvatures).
//! * [`closedform`]: closed-form Gaussian, mean and principal curvatures,
//!   the linear `K`/`H` identity and Weingarten residuals.
//! * [`families`]: radius functions of the flat and minimal families.

pub mod canal;
pub mod closedform;
pub mod diffgeo;
mod error;
pub mod families;
pub mod linalg;
pub mod minkowski;
pub mod radius;
pub mod spine;

pub use canal::{CanalSurface, ShapeKind, TypeTables};
pub use error::{Error, Result};
pub use minkowski::{CausalCharacter, ParallelFrame, Point4, Signature, Vec4};
pub use radius::{RadiusJet, RadiusProfile};
pub use spine::{CurvatureFunctions, FrameKind, SpineCurve};

//! Refraction between homogeneous anisotropic media whose wave fronts are
//! unit spheres of strictly convex norms.
//!
//! The crate is `no_std` (it needs `alloc`). The default `std` feature only
//! adds a rayon-backed parallel section to the refractor measure; results are
//! bit-identical with or without it.
//!
//! Module map:
//!
//! - [`norms`]: norm calculus, dual norms, the contrast constant of a medium pair.
//! - [`snell`]: vector Snell law at a plane interface and a Fermat-principle solver.
//! - [`surfaces`]: surfaces refracting every ray from the origin into one direction.
//! - [`quadrature`]: discretized source energy on a cap of the first unit sphere.
//! - [`solver`]: semi-discrete refractor design.
//! - [`fresnel`]: Fresnel wave-surface algebra and the material-to-norm map.
//! - [`transport`]: exact discrete optimal transport used to cross-check designs.
#![no_std]

extern crate alloc;
#[cfg(feature = "std")]
extern crate std;

mod error;
pub mod fresnel;
pub mod linalg;
pub mod norms;
mod par;
pub mod quadrature;
pub mod snell;
pub mod solver;
pub mod surfaces;
pub mod transport;

pub use error::{Error, Result};
pub use linalg::{Mat, Vector};
pub use norms::{contrast_kappa, MediumPair, Norm, NormKind, Regime};
pub use quadrature::{SourceDensity, SourceProfile, SphericalCap};
pub use snell::{check_constraint, fermat_path, refract, Plane, RefractionEvent};
pub use solver::{
    approximate_measure, solve, solve_discrete, solve_discrete_case_ii, MeasureReport, Refractor,
    Solution, SolveOptions, TargetMeasure,
};
pub use surfaces::{SurfaceNormal, UniformSurface};

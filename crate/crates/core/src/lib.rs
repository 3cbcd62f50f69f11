//! Numerical verification of sharp affine L^p Sobolev trace inequalities on
//! the half-space `R^n_+ = {(t, x) : t > 0, x ∈ R^{n-1}}`.
//!
//! The crate is organised bottom-up:
//!
//! * [`special`] and [`constants`]: Gamma function and the closed-form sharp constants.
//! * [`quadrature`]: sphere, hemisphere, half-line and half-space rules.
//! * [`convex`]: star bodies, support/polar/volume, L_p centroid bodies and
//!   Legendre transforms of homogeneous convex functions.
//! * [`trace`]: test functions, the affine energy, the adapted convex function
//!   `C_f` and the inequality evaluators.
//! * [`report`]: the serializable record produced by each check.

pub mod constants;
pub mod convex;
pub mod error;
pub mod quadrature;
pub mod report;
pub mod special;
pub mod trace;

pub use constants::{ConstantSet, Dimensions};
pub use error::{Error, Result};

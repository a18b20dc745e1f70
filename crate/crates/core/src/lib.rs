//! Resolvent norms and pseudospectra for bilateral weighted shifts under
//! non-Euclidean norms.
//!
//! The crate is organized around one pipeline:
//!
//! 1. [`shift_operators`] builds truncated resolvent matrices for two
//!    families of weighted shifts on doubly infinite sequence windows,
//!    together with certified truncation-error bounds.
//! 2. [`vector_norms`] evaluates the norms those operators are measured in:
//!    the `lp` scales, a hybrid "star" norm that mixes a Euclidean bulk with
//!    two distinguished coordinates, and general two-block sums driven by the
//!    scalar shape functions of [`absolute_norms`].
//! 3. [`opnorm`] estimates operator norms between any two of those norms by
//!    multi-start subgradient ascent (exact power iteration in the Euclidean
//!    case), always returning a certified lower bound with a witness vector.
//! 4. [`pseudospectra`] sweeps resolvent-norm estimates over grids in the
//!    complex plane and classifies flat level sets, the phenomenon this crate
//!    exists to exhibit: one shift family has resolvent norm constant on an
//!    entire disc under the star norm, while the Euclidean norm shows real
//!    variation on the same disc.
//! 5. [`convexity`] and [`semigroup`] probe the two structural properties
//!    that explain the dichotomy: complex strict/uniform convexity of the
//!    norm, and a Landau–Kolmogorov-type inequality for semigroup generators.
//!
//! All estimators are deterministic for a fixed seed, and every reported
//! operator-norm value is a true lower bound realized by its witness.

pub mod absolute_norms;
pub mod convexity;
pub mod error;
pub mod linalg;
pub mod opnorm;
pub mod pseudospectra;
pub mod semigroup;
pub mod shift_operators;
pub mod vector_norms;

pub use error::{Error, Result};

//! Crate-wide error type.

use thiserror::Error;

/// Convenience alias used by every fallible API in this crate.
pub type Result<T> = std::result::Result<T, Error>;

/// All failure modes surfaced by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// A caller-supplied parameter is outside its documented range.
    #[error("invalid parameter `{name}`: {message}")]
    InvalidParameter {
        name: &'static str,
        message: String,
    },

    /// A scalar shape function failed the membership check (endpoint values,
    /// envelope bounds, or midpoint convexity).
    #[error("shape function fails membership: {0}")]
    InvalidShape(String),

    /// A shape function was evaluated outside its domain.
    #[error("argument {value} outside the unit interval [0, 1]")]
    OutsideUnitInterval { value: f64 },

    /// A two-block norm was fed negative block magnitudes.
    #[error("block magnitudes must be nonnegative, got ({z}, {v})")]
    NegativeModulus { z: f64, v: f64 },

    /// A norm requires coordinates the window does not contain.
    #[error("window incompatible with norm: {0}")]
    IncompatibleWindow(String),

    /// The two index sets of a blocked norm overlap, leave the window, or
    /// omit a coordinate that carries mass.
    #[error("index sets do not partition the support: {0}")]
    BadPartition(String),

    /// A direction or normalization was requested for the zero vector.
    #[error("zero vector where a nonzero vector is required")]
    ZeroVector,

    /// A spectral parameter lies outside the disc on which the truncated
    /// resolvent carries a certified error bound.
    #[error("|lambda| = {modulus} outside the validated disc of radius {radius}")]
    OutsideValidatedDisc { modulus: f64, radius: f64 },

    /// Dense linear solve hit a numerically singular matrix.
    #[error("matrix is numerically singular")]
    SingularMatrix,

    /// A grid operation was asked of a grid with no values.
    #[error("grid holds no values")]
    EmptyGrid,

    /// The semigroup norm overflowed while sweeping the time window.
    #[error("semigroup norm overflowed near t = {t}")]
    UnboundedOverWindow { t: f64 },

    /// A CSV payload failed to parse.
    #[error("csv line {line}: {message}")]
    Csv { line: usize, message: String },

    /// Underlying I/O failure while reading or writing CSV.
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Shorthand for [`Error::InvalidParameter`].
    pub(crate) fn invalid(name: &'static str, message: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            message: message.into(),
        }
    }
}

use thiserror::Error;

/// Crate-wide error type.
///
/// `Validation` marks a computed quantity violating a required bound (the
/// CLI maps it to exit code 2); the other variants are bad inputs.
#[derive(Debug, Error)]
pub enum Error {
    /// Curve data is malformed: too few vertices, non-finite coordinates,
    /// repeated consecutive vertices, zero signed area, self-intersection.
    #[error("invalid curve: {0}")]
    InvalidCurve(String),

    /// An argument is outside its documented domain.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A computed quantity violated a bound it was required to satisfy.
    #[error("validation failure: {0}")]
    Validation(String),

    #[error("serialization: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

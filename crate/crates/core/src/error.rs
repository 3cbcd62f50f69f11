use thiserror::Error;

/// Everything that can go wrong while building rules, bodies or test functions.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid dimensions: n = {n}, p = {p} (need n >= 3 and 1 < p < n)")]
    Dimensions { n: usize, p: f64 },

    #[error("unsupported quadrature order {order} (allowed 0..={max})")]
    UnsupportedOrder { order: usize, max: usize },

    #[error("insufficient decay: integrand power {power} over R^{dim} is not integrable")]
    InsufficientDecay { power: f64, dim: usize },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("malformed body record: {0}")]
    BodyFormat(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument is outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A potential document is malformed; `index` points at the offending segment.
    #[error("potential format error at segment {index}: {reason}")]
    PotentialFormat { index: usize, reason: String },

    /// A pole-set document is malformed; `index` points at the offending pole.
    #[error("pole set format error at pole {index}: {reason}")]
    PoleFormat { index: usize, reason: String },

    /// The requested quantity cannot be resolved at the given discretization.
    #[error("resolution error: {0}")]
    Resolution(String),

    /// Invalid run configuration (step sizes, policies, grids).
    #[error("configuration error: {0}")]
    Config(String),

    /// A series or quadrature was asked for outside its range of validity.
    #[error("range error: {0}")]
    Range(String),

    /// A result overflowed the double range and cannot be represented.
    #[error("overflow: {0}")]
    Overflow(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

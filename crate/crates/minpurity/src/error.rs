//! Error type shared by every module of the crate.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: {left} vs {right}")]
    DimensionMismatch {
        context: &'static str,
        left: usize,
        right: usize,
    },

    #[error("matrix is not Hermitian (residual {residual:.3e})")]
    NotHermitian { residual: f64 },

    #[error("matrix is not unitary (residual {residual:.3e})")]
    NotUnitary { residual: f64 },

    #[error("not a density operator: {reason}")]
    NotDensity { reason: String },

    #[error("not a projector: {reason}")]
    NotProjector { reason: String },

    #[error("probability {value} lies outside [0,1] beyond tolerance; the scheme is broken")]
    ProbabilityOutOfRange { value: f64 },

    #[error("POVM element spectrum outside [0,1]: eigenvalue {eigenvalue}")]
    SpectrumOutOfRange { eigenvalue: f64 },

    #[error("dimension {dim} must be odd for this construction")]
    OddDimRequired { dim: usize },

    #[error("dimension {dim} must be even for this construction")]
    EvenDimRequired { dim: usize },

    #[error("index out of range: {what}")]
    IndexOutOfRange { what: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("matrix contains a non-finite entry")]
    NonFinite,

    #[error("numerical failure: {0}")]
    Numerical(String),
}

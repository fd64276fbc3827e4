//! Error type shared by all modules of the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A special function or model operation received a NaN or infinity.
    #[error("non-finite input to {0}")]
    NonFinite(&'static str),

    /// A domain type invariant was violated at construction.
    #[error("invalid {field}: {msg}")]
    InvalidParameter { field: &'static str, msg: String },

    /// Negative pseudopotential passed to the modulation-index conversion.
    #[error("pseudopotential must be nonnegative, got {0} V")]
    NegativePseudopotential(f64),

    /// An operation has no solution for the given configuration
    /// (e.g. beam orthogonal to the micromotion, zero trap curvature).
    #[error("singular configuration: {0}")]
    SingularConfiguration(&'static str),

    /// The kappa^2 polynomial went negative inside the scanned region.
    #[error("kappa^2 = {value} < 0 at E_y = {ey} kV/m")]
    InvalidMap { ey: f64, value: f64 },

    /// A scan or fit specification failed validation.
    #[error("invalid spec: {0}")]
    InvalidSpec(String),

    /// Thermal-state truncation does not hold the required probability mass.
    #[error("thermal truncation unconverged: {0}")]
    Truncation(String),

    /// CSV ingestion failure.
    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

use thiserror::Error;

/// Errors raised by the library. Every fallible operation returns [`Result`].
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid spin: twice-S = {0} must be non-negative")]
    InvalidSpin(i64),

    #[error("invalid spin sector S = {s} for N = {n}: {reason}")]
    InvalidSector {
        s: f64,
        n: usize,
        reason: &'static str,
    },

    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("operator is not {expected} (max deviation {deviation:e})")]
    NotHermitian {
        expected: &'static str,
        deviation: f64,
    },

    #[error("dimension mismatch: {context} (expected {expected}, got {got})")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("Hilbert-space dimension {dim} exceeds the limit of {limit} rows")]
    DimensionTooLarge { dim: usize, limit: usize },

    #[error(
        "SW undefined at resonance: |omega_c - omega_z| = {detuning:e} is below {threshold:e}"
    )]
    Resonance { detuning: f64, threshold: f64 },

    #[error("|m_z| = {m_z} exceeds S = {s}")]
    MagneticNumberOutOfRange { m_z: f64, s: f64 },

    #[error("sector list is inconsistent: {0}")]
    SectorSet(String),

    #[error("dynamically unstable form: {0}")]
    Unstable(String),

    #[error("no convergence: {0}")]
    NotConverged(String),

    #[error("Hepp-Lieb sandwich violated: {0}")]
    BoundViolation(String),

    #[error("missing data: {0}")]
    Missing(String),

    #[error("wall-time cap of {0} s exceeded")]
    Timeout(f64),

    #[error("i/o: {0}")]
    Io(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

pub(crate) fn check_positive(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            value,
            reason: "must be finite and > 0",
        })
    }
}

pub(crate) fn check_non_negative(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            value,
            reason: "must be finite and >= 0",
        })
    }
}

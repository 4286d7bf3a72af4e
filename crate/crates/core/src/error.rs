use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("gcd({q}, {p}) != 1")]
    NotCoprime { q: i64, p: i64 },

    #[error("expansion exhausted: requested depth {requested}, only {available} terms available")]
    ExpansionExhausted { requested: usize, available: usize },

    #[error("quantum integer vanishes: [{j}] at q/p = {q}/{p}")]
    QuantumIntegerVanishes { j: i64, q: String, p: String },

    #[error("modulus polynomial is not monic")]
    NotMonic,

    #[error("insufficient expansion depth: {0}")]
    InsufficientDepth(String),

    #[error("integer certification failed after {attempts} attempts (best residual {best_residual:e}, {bits} bits)")]
    CertificationFailed { attempts: usize, best_residual: f64, bits: usize },

    #[error("argument tracking unstable near t = {t:e}")]
    ArgTrackingUnstable { t: f64 },

    #[error("methods disagree at q/p = {q}/{p}: {detail}")]
    MethodDisagreement { q: i64, p: i64, detail: String },

    #[error("rational endpoint: the expansion terminates after {terms} terms")]
    RationalEndpoint { terms: usize },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// Coarse classification used by front ends to pick exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// The caller supplied arguments outside an operation's domain.
    Usage,
    /// A numeric procedure could not certify or stabilise its result.
    Numeric,
    /// Two independent computations disagreed.
    Contract,
    /// Anything else (I/O, serialization).
    Other,
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::InvalidInput(_)
            | Error::NotCoprime { .. }
            | Error::ExpansionExhausted { .. }
            | Error::QuantumIntegerVanishes { .. }
            | Error::NotMonic
            | Error::RationalEndpoint { .. }
            | Error::Unsupported(_) => ErrorKind::Usage,
            Error::InsufficientDepth(_)
            | Error::CertificationFailed { .. }
            | Error::ArgTrackingUnstable { .. } => ErrorKind::Numeric,
            Error::MethodDisagreement { .. } => ErrorKind::Contract,
            Error::Io(_) | Error::Csv(_) | Error::Json(_) => ErrorKind::Other,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}

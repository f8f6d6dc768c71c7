use thiserror::Error;

/// Errors raised by state construction, conditioning and observable evaluation.
///
/// Numeric payloads are carried as `f64` regardless of the scalar type in use.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParams(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("truncation insufficient: neglected mass {tail:.3e} exceeds tolerance {tol:.3e} at n_max={n_max}")]
    TruncationInsufficient { tail: f64, tol: f64, n_max: usize },

    #[error("required Fock cutoff exceeds hard cap {cap}")]
    TruncationCapExceeded { cap: usize },

    #[error("ensemble tail weight did not fall below {tol:.3e} within {cap} terms")]
    NonConvergence { tol: f64, cap: usize },

    #[error("norm of photon-added state underflowed (m={m})")]
    NormUnderflow { m: usize },

    #[error("grid too narrow: boundary value {boundary:.3e} exceeds {limit:.3e}")]
    GridTooNarrow { boundary: f64, limit: f64 },

    #[error("negative probability {value:.3e} at index {index}")]
    NegativeProbability { index: usize, value: f64 },

    #[error("Mandel Q undefined for a state with zero mean photon number")]
    UndefinedQ,
}

impl Error {
    /// True for errors caused by the caller's configuration rather than by the numerics.
    pub fn is_config(&self) -> bool {
        matches!(self, Error::InvalidParams(_) | Error::Domain(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;

//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    /// Incompatible or out-of-range dimensions (empty DFT, N > D, vector
    /// length mismatch against a matrix shape, ...).
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),

    /// A parameter value outside its documented domain.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A linear system whose matrix is singular or numerically unusable.
    #[error("singular matrix (1-norm condition estimate {cond:.3e})")]
    SingularMatrix { cond: f64 },

    /// Pilot frequency bins that leave the bin-restricted pilot response
    /// ill-conditioned, so no precancelling design exists for them.
    #[error("pilot bin selection is ill-conditioned (condition estimate {cond:.3e})")]
    BinSelection { cond: f64 },

    /// A frequency-domain channel coefficient of exactly zero; the
    /// zero-forcing equalizer cannot divide by it.
    #[error("zero channel coefficient at frequency bin {bin}")]
    EqualizationSingular { bin: usize },

    /// Malformed configuration input.
    #[error("config error: {0}")]
    Config(String),

    /// A numerical operation that cannot produce a usable result
    /// (non-positive-definite covariance, non-finite values, ...).
    #[error("numerical failure: {0}")]
    Numerical(String),
}

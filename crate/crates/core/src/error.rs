use thiserror::Error;

/// Failures reported by every fallible operation in the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument is outside the operation's domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// The requested spectral cutoff needs more modes than the crate will enumerate.
    #[error("resource limit exceeded: k_lambda = {k_lambda} (limit {limit})")]
    Resource { k_lambda: usize, limit: usize },

    /// The pair of points is too close for the finite-lambda ratio to be resolved.
    #[error("degenerate pair: {0}")]
    Degenerate(String),

    /// A quantity that is positive in exact arithmetic came out non-positive.
    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}

use thiserror::Error;

/// Errors raised by bound evaluation, oracles and searches.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A probability parameter falls outside `[0, 1]`.
    #[error("probability {value} out of range for {name}")]
    InvalidProbability { name: &'static str, value: f64 },

    /// An argument violates the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A stated precondition of a bound does not hold (for example a
    /// variance restriction, or asking an upper-tail bound for a lower
    /// tail).
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// The spec kind does not carry the parameters this operation needs.
    #[error("unsupported spec: {0}")]
    UnsupportedSpec(String),

    /// A numeric evaluator failed an internal sanity check.
    #[error("diagnostic failure: {0}")]
    Diagnostic(String),

    /// A search ran out of budget before finding what it was looking for.
    /// The payload carries the schedule that was tried.
    #[error("search budget exhausted after {attempts} candidates")]
    SearchExhausted { attempts: usize, log: Vec<String> },

    /// Malformed textual input (rational literals, manifests).
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn precondition(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }
}

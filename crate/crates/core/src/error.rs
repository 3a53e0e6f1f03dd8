use thiserror::Error;

/// Errors raised by the numerical routines and parameter validation.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("pole of {func} at {at}")]
    Pole { func: &'static str, at: f64 },

    #[error("argument out of domain in {func}: {detail}")]
    Domain { func: &'static str, detail: String },

    #[error("Meijer-G parameters collide: a[{a_index}] - b[{b_index}] is a positive integer")]
    PoleCollision { a_index: usize, b_index: usize },

    #[error("{what} did not converge (estimate {estimate:e}, error {error:e})")]
    NoConvergence {
        what: &'static str,
        estimate: f64,
        error: f64,
    },

    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}

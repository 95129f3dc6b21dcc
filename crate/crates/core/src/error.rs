use thiserror::Error;

/// Errors raised by the analysis routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside its mathematical domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// The sampling grid is too coarse for the requested quantity.
    #[error("precision error: {what}; need resolution >= {required_resolution}")]
    Precision {
        what: String,
        required_resolution: usize,
    },

    /// The ODE integrator produced a non-finite value.
    #[error("integration error: {0}")]
    Integration(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

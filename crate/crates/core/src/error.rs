use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Input outside the mathematical domain of a formula.
    #[error("domain error in `{field}`: {reason}")]
    Domain { field: &'static str, reason: String },

    #[error("grid resolution error: {0}")]
    Resolution(String),

    #[error("query {query} outside tabulated range [{min}, {max}]")]
    OutOfRange { query: f64, min: f64, max: f64 },

    /// Curve analysis could not complete (clipped envelope, missing half-maximum crossing).
    #[error("analysis error: {0}")]
    Analysis(String),

    #[error("numerical error: {0}")]
    Numerical(String),

    #[error("precondition violated: {0}")]
    Precondition(String),
}

impl Error {
    pub(crate) fn domain(field: &'static str, reason: impl Into<String>) -> Self {
        Error::Domain { field, reason: reason.into() }
    }
}

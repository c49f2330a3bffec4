use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input `{field}`: {reason}")]
    InvalidInput { field: &'static str, reason: String },

    #[error("matrix is not positive definite (pivot {pivot} = {value:e})")]
    NotPositiveDefinite { pivot: usize, value: f64 },

    #[error("{what} did not converge within {iterations} iterations")]
    NoConvergence { what: &'static str, iterations: usize },

    #[error("argument {0} is a pole of the function")]
    Pole(String),

    #[error("{0}")]
    Capability(String),

    #[error("energy {energy:e} is within {distance:e} of a Harris eigenvalue; shift the evaluation point")]
    NearHarrisPole { energy: f64, distance: f64 },

    #[error("singular kinematics: {0}")]
    SingularKinematics(String),

    #[error("operation requires {required} mode")]
    ModeMismatch { required: &'static str },

    #[error("singular linear system: {0}")]
    Singular(String),
}

impl Error {
    pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidInput { field, reason: reason.into() }
    }
}

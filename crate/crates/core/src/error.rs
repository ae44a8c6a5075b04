use thiserror::Error;

/// Errors raised by the constitutive laws, solvers and drivers.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain of a law or map.
    #[error("domain error: {0}")]
    Domain(String),

    /// A parameter or constructor argument is invalid.
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: String, reason: String },

    /// A deformation gradient reached zero or became negative; the elastic
    /// response is undefined there and the deformation is no longer injective.
    #[error("singular configuration: {0}")]
    SingularConfiguration(String),

    /// The liquid domain degenerated (s <= 0).
    #[error("degenerate liquid domain: s = {0}")]
    DegenerateDomain(f64),

    /// Newton did not reach the tolerance within the iteration cap.
    #[error("{solver}: Newton failed to converge after {iterations} iterations (residual {residual:.3e})")]
    NewtonDivergence {
        solver: &'static str,
        iterations: usize,
        residual: f64,
    },

    /// The banded linear solve hit a zero pivot.
    #[error("singular linear system at row {0}")]
    SingularMatrix(usize),

    /// Picard coupling did not settle within the iteration cap.
    #[error("coupling failed to converge after {iterations} iterations; change history {history:?}")]
    Coupling { iterations: usize, history: Vec<f64> },

    /// A constitutive assumption check failed.
    #[error("assumption violated: {0}")]
    Assumption(String),

    /// Galerkin basis construction failed.
    #[error("basis error: {0}")]
    Basis(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name: name.to_string(),
        reason: reason.into(),
    }
}

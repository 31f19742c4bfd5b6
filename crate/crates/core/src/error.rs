//! Error taxonomy shared by all modules.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A parameter lies outside the mathematical domain of the operation
    /// (non-positive radius, exponent at or below one, zero charge, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// Structurally valid input that is degenerate for the requested
    /// operation: coincident points, a point at the origin where the
    /// functional divides by it, or zero total mass.
    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    /// Invalid solver or search configuration (bad dimensions, empty grids,
    /// schedules outside their ranges).
    #[error("configuration error: {0}")]
    Configuration(String),

    /// An iterative solver exhausted its budget. Carries the tail of the
    /// residual history for diagnosis.
    #[error("did not converge: {message}")]
    Convergence {
        message: String,
        residual_trace: Vec<f64>,
    },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn degenerate(msg: impl Into<String>) -> Self {
        Error::DegenerateInput(msg.into())
    }

    pub fn configuration(msg: impl Into<String>) -> Self {
        Error::Configuration(msg.into())
    }
}

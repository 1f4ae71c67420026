use thiserror::Error;

use crate::fixedpoint::ContractionLog;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Grid too small for a stencil, or a trajectory too short for an operation.
    #[error("sizing error: {0}")]
    Sizing(String),

    /// Operands live on different grids or have incompatible lengths.
    #[error("shape error: {0}")]
    Shape(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// Near-singular factorization, or a non-finite value during time stepping.
    #[error("numerical failure: {message}")]
    Numerical {
        message: String,
        /// Smallest pivot magnitude seen, when the failure comes from a factorization.
        pivot: Option<f64>,
        /// Time step at which a non-finite value appeared.
        step: Option<usize>,
    },

    #[error("Picard iteration did not converge after {} iterations", .log.iterates)]
    NonConvergence { log: Box<ContractionLog> },
}

impl Error {
    pub(crate) fn sizing(msg: impl Into<String>) -> Self {
        Error::Sizing(msg.into())
    }

    pub(crate) fn shape(msg: impl Into<String>) -> Self {
        Error::Shape(msg.into())
    }

    pub(crate) fn parameter(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }
}

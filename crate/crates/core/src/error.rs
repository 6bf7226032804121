use thiserror::Error;

use crate::numerics::NumericsError;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error in {op}: {reason}")]
    Domain { op: &'static str, reason: String },

    #[error(transparent)]
    Numerics(#[from] NumericsError),

    /// The optimal-protocol IVP did not arrive at the required final spacing.
    #[error("optimal protocol ended at lambda(1) = {achieved}, expected {expected} (tolerance {tolerance})")]
    EndpointMismatch {
        achieved: f64,
        expected: f64,
        tolerance: f64,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn domain(op: &'static str, reason: impl Into<String>) -> Self {
        Error::Domain {
            op,
            reason: reason.into(),
        }
    }

    /// Short machine-readable tag used by the CLI when reporting failures.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Domain { .. } => "domain",
            Error::Numerics(NumericsError::Quadrature { .. }) => "quadrature",
            Error::Numerics(_) => "ode",
            Error::EndpointMismatch { .. } => "endpoint-mismatch",
            Error::Config(_) => "config",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
        }
    }
}

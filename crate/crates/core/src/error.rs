use thiserror::Error;

/// Errors produced by the analysis and simulation routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A parameter or configuration value violates its contract.
    #[error("invalid config: {0}")]
    InvalidConfig(String),

    /// Input data is malformed (bits outside {0,1}, ragged records, means outside [0,1]).
    #[error("invalid data: {0}")]
    InvalidData(String),

    /// Not enough shots (or samples) for the requested window geometry.
    #[error("insufficient data: need at least {required} {unit}, got {available}")]
    InsufficientData {
        required: usize,
        available: usize,
        unit: &'static str,
    },

    /// An empty subset was passed where at least one shot is required.
    #[error("empty data: {0}")]
    EmptyData(String),

    /// Argument outside the mathematical domain of a function.
    #[error("domain error: {0}")]
    Domain(String),

    /// An iterative evaluation did not converge.
    #[error("no convergence: {0}")]
    NoConvergence(String),
}

pub type Result<T> = std::result::Result<T, Error>;

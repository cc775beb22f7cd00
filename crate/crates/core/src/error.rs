use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A formula was evaluated on (or within the guard band of) one of its poles.
    #[error("singular evaluation of {what}: pole at {pole_hz} Hz")]
    Singularity { what: &'static str, pole_hz: f64 },

    #[error("resource limit exceeded: {0}")]
    ResourceLimit(String),

    #[error("invalid configuration: {0}")]
    Configuration(String),

    #[error("no convergence: {0}")]
    Convergence(String),

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    #[error("insufficient data: need at least {needed} points, got {got}")]
    InsufficientData { needed: usize, got: usize },

    /// Residual function produced a non-finite value during a search.
    #[error("non-finite residual at parameters {point:?}")]
    NonFiniteResidual { point: Vec<f64> },

    #[error("{path}: missing column `{column}`")]
    Schema { path: PathBuf, column: String },

    #[error("{path}: duplicate frequencies {frequencies:?}")]
    DuplicateFrequencies { path: PathBuf, frequencies: Vec<f64> },

    #[error("{path}: row {row}: {message}")]
    Row {
        path: PathBuf,
        row: usize,
        message: String,
    },

    #[error("not modeled: {0}")]
    NotModeled(&'static str),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}

use thiserror::Error;

/// Errors produced by the GP and safety-decision machinery.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    /// The posterior mean is non-positive at discretization index `index`,
    /// so the centering transform is not available.
    #[error("posterior mean changes sign on the trajectory (mu[{index}] = {value})")]
    MeanSignChange { index: usize, value: f64 },

    /// The estimated median of the centered supremum exceeds the unit threshold.
    #[error("median estimate {0} exceeds the unit threshold")]
    MedianInfeasible(f64),

    /// Too few samples to form the requested order statistic.
    #[error("insufficient samples for the requested quantile level")]
    InsufficientSamples,
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}

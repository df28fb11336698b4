use thiserror::Error;

/// Errors raised by the simulator and the analytical evaluators.
#[derive(Debug, Error)]
pub enum Error {
    /// Invalid scenario or experiment parameters.
    #[error("configuration error: {0}")]
    Config(String),

    /// An argument lies outside the domain of a density or closed form.
    #[error("domain error: {0}")]
    Domain(String),

    /// A caller violated an input contract (e.g. unsorted gains).
    #[error("contract violation: {0}")]
    Contract(String),

    /// Incompatible scheme/metric combination or malformed request.
    #[error("usage error: {0}")]
    Usage(String),

    /// Rejection sampling for a conditioning event exhausted its attempt budget.
    #[error("sampling cap reached: {attempts} attempts without completing {trials} conditioned trials ({event})")]
    SamplingCap {
        attempts: u64,
        trials: u64,
        event: String,
    },

    #[error("quadrature did not converge: {0}")]
    Quadrature(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

pub(crate) fn config(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

pub(crate) fn usage(msg: impl Into<String>) -> Error {
    Error::Usage(msg.into())
}

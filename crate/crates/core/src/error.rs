use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument was outside the domain of the operation.
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// Input data violated a structural requirement (non-finite value, empty sample, ...).
    #[error("invalid data: {0}")]
    Data(String),

    /// Minimum-distance estimation could not be carried out.
    #[error("estimation failed: {0}")]
    Estimation(String),

    /// A null distribution table does not match the requested test.
    #[error("calibration mismatch: {0}")]
    Calibration(String),

    /// The power-study configuration is malformed.
    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn param<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Parameter(msg.into()))
}

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("estimation failed: {0}")]
    Estimation(String),
    #[error("bandwidth selection failed: {0}")]
    Selection(String),
    #[error("unsupported kind: {0}")]
    Unsupported(String),
    #[error("quadrature did not converge (best estimate {value:e}, error {error:e})")]
    NoConvergence { value: f64, error: f64 },
    #[error("config error: {0}")]
    Config(String),
    #[error("incomplete records: {0}")]
    Incomplete(String),
    #[error("{path}: {message}")]
    Io { path: String, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}

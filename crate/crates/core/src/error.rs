use thiserror::Error;

/// Errors raised by the library.
///
/// `Domain` covers values outside a function's mathematical domain
/// (non-positive lengths, non-finite inputs, invalid distribution
/// parameters). `Contract` covers misuse of an API's preconditions
/// (mismatched sequence lengths, advancing a terminal state, empty input).
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("contract error: {0}")]
    Contract(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }

    pub(crate) fn parse(msg: impl Into<String>) -> Self {
        Error::Parse(msg.into())
    }

    /// Short machine-readable tag (`domain`, `contract`, `parse`).
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Domain(_) => "domain",
            Error::Contract(_) => "contract",
            Error::Parse(_) => "parse",
        }
    }
}

pub(crate) fn ensure_positive(name: &str, value: f64) -> Result<()> {
    if !value.is_finite() {
        return Err(Error::domain(format!("{name} must be finite, got {value}")));
    }
    if value <= 0.0 {
        return Err(Error::domain(format!("{name} must be > 0, got {value}")));
    }
    Ok(())
}

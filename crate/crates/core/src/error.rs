use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A value outside the mathematical domain of a function or model.
    #[error("domain error: {0}")]
    Domain(String),
    /// A malformed argument (bad sizes, non-monotone lists, ...).
    #[error("invalid argument: {0}")]
    Argument(String),
    /// Non-finite observation handed to a detector or density.
    #[error("invalid input: {0}")]
    Input(String),
    /// Quadrature or Monte-Carlo failed to produce a usable number.
    #[error("numeric failure: {0}")]
    Numeric(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn ensure_finite(name: &str, x: f64) -> Result<()> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} must be finite, got {x}")))
    }
}

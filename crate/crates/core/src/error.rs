use thiserror::Error;

/// Errors raised by the laboratory.
///
/// `Certificate` is reserved for outcomes that a construction guarantees
/// and that therefore indicate a numerical or logic failure when they occur.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("window length {r} is not smaller than the data span {span}")]
    WindowTooLarge { r: f64, span: f64 },

    #[error("quadrature too coarse: {0}")]
    QuadratureTooCoarse(String),

    #[error("certificate violated: {0}")]
    Certificate(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidInput(msg.into()))
}

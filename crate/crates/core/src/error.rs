use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("argument out of domain: {0}")]
    Domain(String),

    #[error("invalid N-function: {0}")]
    InvalidNFunction(String),

    #[error("conjugate is unbounded at t = {t}: density never reaches t on [0, 2^{max_exponent}]")]
    UnboundedConjugate { t: f64, max_exponent: u32 },

    #[error("invalid grid: {0}")]
    Grid(String),

    #[error("field/grid mismatch: {0}")]
    Shape(String),

    #[error("inadmissible epsilon {eps}: {reason}")]
    Epsilon { eps: f64, reason: String },

    #[error("xi = {xi:?} lies outside the tabulated range")]
    Extrapolation { xi: Vec<f64> },

    #[error("invalid integrand: {0}")]
    Integrand(String),

    #[error("{0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

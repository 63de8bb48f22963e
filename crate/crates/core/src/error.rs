use thiserror::Error;

use crate::kernel::Flavor;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid kernel: {0}")]
    InvalidKernel(String),

    #[error("degenerate kernel: |mass| = {mass:e} is below the normalization threshold")]
    DegenerateKernel { mass: f64 },

    #[error("flavor mismatch: expected {expected:?}, found {found:?}")]
    FlavorMismatch { expected: Flavor, found: Flavor },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("quadrature failed to converge on [{a}, {b}]")]
    QuadratureFailed { a: f64, b: f64 },

    #[error("transform failed to converge at frequency {xi}")]
    TransformFailed { xi: f64 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

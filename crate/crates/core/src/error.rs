use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("matrix is numerically singular (diagonal of R at index {index} is {value:e})")]
    SingularMatrix { index: usize, value: f64 },

    #[error(
        "Newton iteration failed to converge after {iterations} iterations (residual {residual:e})"
    )]
    NewtonDiverged { iterations: usize, residual: f64 },

    #[error("non-finite value produced at t = {time}")]
    NonFinite { time: f64 },

    #[error("pipeline protocol violation: {0}")]
    Protocol(String),

    #[error("pipeline deadlock: {0}")]
    Deadlock(String),
}

impl Error {
    pub(crate) fn check_len(expected: usize, found: usize) -> Result<()> {
        if expected == found {
            Ok(())
        } else {
            Err(Error::DimensionMismatch { expected, found })
        }
    }
}

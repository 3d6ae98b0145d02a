use thiserror::Error;

/// Error type shared by every module of the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid domain parameters: {0}")]
    InvalidDomain(String),

    #[error("point ({x1}, {x2}) lies outside the domain")]
    OutOfDomain { x1: f64, x2: f64 },

    #[error("argument outside the admissible range: {0}")]
    DomainArgument(String),

    #[error("boundary profile is not finite at s = {0}")]
    NonFiniteProfile(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("iteration did not converge after {iterations} sweeps (max delta {max_delta:e})")]
    NonConvergence { iterations: usize, max_delta: f64 },

    #[error("quadrature did not reach tolerance (estimated error {0:e})")]
    Quadrature(f64),

    #[error("divergent integral: {0}")]
    Divergent(String),

    #[error("test function not admissible: {0}")]
    Inadmissible(String),

    #[error("window exceeds the solved range: {0}")]
    WindowOutOfRange(String),

    #[error("premise battery failed: {0}")]
    PremiseFailed(String),

    #[error("malformed input: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

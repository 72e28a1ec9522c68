use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid body: {0}")]
    InvalidBody(String),

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("mixed shape kinds in Minkowski average ({0} vs {1})")]
    MixedShapes(&'static str, &'static str),

    #[error("vertex combination count {count} exceeds cap {cap}")]
    CombinationCap { count: usize, cap: usize },

    #[error("projection did not converge after {iterations} iterations (residual {residual:e})")]
    ProjectionDiverged { iterations: usize, residual: f64 },

    #[error("unsupported dimension {0} (supported range {1}..={2})")]
    UnsupportedDimension(usize, usize, usize),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("inadmissible prior: {0}")]
    InadmissiblePrior(String),

    #[error("optimization boundary extremum without interior bracketing: {0}")]
    CoarseGrid(String),

    #[error("quadrature did not converge (error estimate {0:e})")]
    Quadrature(f64),

    #[error("tail function is not decreasing on the probe grid near s = {0}")]
    NotDecreasing(f64),

    #[error("atom count {count} exceeds cap {cap}")]
    AtomCap { count: usize, cap: usize },

    #[error("invalid finite space: {0}")]
    InvalidSpace(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}

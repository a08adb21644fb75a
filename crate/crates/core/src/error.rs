use thiserror::Error;

/// Errors raised by the numerical routines in this crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid surface: {0}")]
    InvalidSurface(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("root finder did not converge after {iterations} iterations (residual {residual:e})")]
    RootFinderFailed { iterations: usize, residual: f64 },

    #[error("Newton projection failed: {0}")]
    ProjectionFailed(String),

    #[error("point is on the branch locus: |df/dx| = {0:e}")]
    BranchPoint(f64),

    #[error("degenerate z = 0 slice: f(x, y, 0) vanishes identically")]
    DegenerateSlice,

    #[error("slice component count disagrees between base radii: {0} vs {1}")]
    SliceCountMismatch(usize, usize),

    #[error("construction not applicable: {0}")]
    NotApplicable(String),

    #[error("root continuation failed on parameter interval [{start}, {end}]")]
    ContinuationFailed { start: f64, end: f64 },

    #[error("empty input: {0}")]
    Empty(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

use thiserror::Error;

use crate::states::ValidationReport;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is empty")]
    Empty,
    #[error("matrix has non-finite entries")]
    NonFinite,
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("dimension {requested} exceeds the configured cap {cap}")]
    DimensionCap { requested: usize, cap: usize },
    #[error("operator is not Hermitian (max deviation {0:e})")]
    NotHermitian(f64),
    #[error("trace {0} is not 1")]
    NotNormalized(f64),
    #[error("minimum eigenvalue {0:e} is negative")]
    NotPositive(f64),
    #[error("operator is not a projector (max deviation {0:e})")]
    NotProjector(f64),
    #[error("state vector has zero norm")]
    ZeroVector,
    #[error("exponent {0} is outside [0, 1]")]
    ExponentOutOfRange(f64),
    #[error("eigendecomposition did not converge (dimension {0})")]
    Decomposition(usize),
    #[error("trace has non-negligible imaginary part {0:e}")]
    ComplexTrace(f64),
    #[error("invalid priors: {0}")]
    InvalidPriors(String),
    #[error("invalid state model: {0}")]
    InvalidModel(String),
    #[error("block size {n} is out of range (model supports 1..={max})")]
    BlockOutOfRange { n: usize, max: usize },
    #[error("invalid hypothesis set: {0}")]
    InvalidHypotheses(ValidationReport),
    #[error("invalid pairwise distances: {0}")]
    InvalidDistances(String),
    #[error("at least two hypotheses are required, got {0}")]
    TooFewHypotheses(usize),
    #[error("block length {n} is smaller than the number of pairs {pairs}")]
    BlockTooShort { n: usize, pairs: usize },
    #[error("invalid weights: {0}")]
    InvalidWeights(String),
    #[error("vote vector has length {got}, expected {expected}")]
    VoteLength { got: usize, expected: usize },
    #[error("{0} pairs is too many for exhaustive vote enumeration (limit {1})")]
    TooManyPairs(usize, usize),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("Monte Carlo needs at least one sample")]
    ZeroSamples,
    #[error("exponent fit failed: {0}")]
    Fit(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// Failure caused by a resource limit rather than invalid input.
    pub fn is_resource_limit(&self) -> bool {
        matches!(self, Error::DimensionCap { .. } | Error::TooManyPairs(..))
    }

    /// Failure caused by invalid or incompatible input.
    pub fn is_validation(&self) -> bool {
        !self.is_resource_limit()
            && !matches!(
                self,
                Error::Decomposition(_) | Error::ComplexTrace(_) | Error::Fit(_) | Error::Io(_)
            )
    }
}

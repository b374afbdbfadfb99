//! Crate-wide error type.

use thiserror::Error;

/// Errors raised by geometry, estimation and testing routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("composition needs at least 2 parts, got {0}")]
    TooFewParts(usize),
    #[error("all entries are zero; closure undefined")]
    AllZero,
    #[error("negative entry {value} at part {index}")]
    NegativeEntry { index: usize, value: f64 },
    #[error("zero entry at part {index} rejected under strict zero policy")]
    ZeroPart { index: usize },
    #[error("nonpositive part {value} at index {index}; log-ratio transform undefined")]
    NonPositivePart { index: usize, value: f64 },
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("total-constant mismatch: {left} vs {right}")]
    TotalConstantMismatch { left: f64, right: f64 },
    #[error("empty sample")]
    EmptySample,
    #[error("sample size {0} too small; need at least {1}")]
    SampleTooSmall(usize, usize),
    #[error("invalid transform specification: {0}")]
    InvalidTransform(String),
    #[error("inverse not supported for {0}")]
    UnsupportedInverse(&'static str),
    #[error("alpha parameter must be positive, got {0}")]
    InvalidAlpha(f64),

    #[error("invalid window: {0}")]
    InvalidWindow(String),
    #[error("point {index} at ({x}, {y}) lies outside the window")]
    OutOfWindow { index: usize, x: f64, y: f64 },
    #[error("points {first} and {second} coincide; pattern is not simple")]
    NotSimple { first: usize, second: usize },
    #[error("field `{field}` has length {got}, expected {expected}")]
    LengthMismatch {
        field: &'static str,
        got: usize,
        expected: usize,
    },
    #[error("empty pattern")]
    EmptyPattern,
    #[error("pattern needs at least {0} points")]
    TooFewPoints(usize),
    #[error("nonpositive total {value} at point {index}")]
    NonPositiveTotal { index: usize, value: f64 },
    #[error("invalid simulation parameter: {0}")]
    InvalidParam(String),

    #[error("invalid r grid: {0}")]
    InvalidGrid(String),
    #[error("invalid estimator configuration: {0}")]
    InvalidConfig(String),
    #[error("test-function index {index} out of range 1..={dim}")]
    IndexOutOfRange { index: usize, dim: usize },
    #[error("scope/test-function combination not defined: {0}")]
    InvalidSpec(String),
    #[error("moments required for this test function are missing: {0}")]
    MissingMoments(&'static str),
    #[error("normalizer is zero (degenerate marks); normalized curve undefined")]
    DegenerateNormalizer,
    #[error("all grid entries masked; bandwidth too small for this grid")]
    AllMasked,
    #[error("pattern carries no totals")]
    MissingTotals,
    #[error("pattern carries no secondary mark set")]
    MissingMarkSetB,
    #[error("pattern carries no type labels")]
    MissingTypes,

    #[error("envelope needs alpha*(s+1) >= 1; increase the number of permutations")]
    EnvelopeDegenerate,
    #[error("significance level must lie in (0,1), got {0}")]
    InvalidAlphaLevel(f64),
    #[error("curve family needs at least one permutation replicate")]
    NoReplicates,
    #[error("replicate {replicate} failed: {source}")]
    ReplicateFailed {
        replicate: usize,
        #[source]
        source: Box<Error>,
    },
    #[error("curve grids do not match")]
    GridMismatch,
}

pub type Result<T> = std::result::Result<T, Error>;

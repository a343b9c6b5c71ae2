use thiserror::Error;

/// Errors produced anywhere in the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("distribution has an empty alphabet")]
    EmptyAlphabet,
    #[error("weight {value} at index {index} is negative")]
    NegativeWeight { index: usize, value: f64 },
    #[error("weight at index {index} is not finite")]
    NonFiniteWeight { index: usize },
    #[error("weights carry zero total mass")]
    ZeroMass,
    #[error("probabilities sum to {sum}, expected 1")]
    NotNormalized { sum: f64 },
    #[error("row {row} of transition matrix sums to {sum}, expected 1")]
    NotRowStochastic { row: usize, sum: f64 },
    #[error("expected a rank-{expected} joint distribution, found rank {found}")]
    WrongRank { expected: usize, found: usize },
    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch { context: &'static str, expected: usize, found: usize },
    #[error("conditioning event {index} has zero probability")]
    ZeroConditioningEvent { index: usize },
    #[error("index {index} out of range for alphabet of size {size}")]
    IndexOutOfRange { index: usize, size: usize },
    #[error("log score of a report assigning zero probability to the realized signal")]
    LogOfZero,
    #[error("inadmissible support: {0}")]
    InadmissibleSupport(String),
    #[error("prior mode mismatch: {0}")]
    ModeMismatch(String),
    #[error("prior mode cannot generate reports: {0}")]
    UnsupportedPriorMode(String),
    #[error("agents {i} and {j} share no answered question")]
    NoOverlap { i: usize, j: usize },
    #[error("mechanism requires a binary alphabet, found size {0}")]
    NonBinaryAlphabet(usize),
    #[error("signal {signal} reported by agent {agent} has zero frequency among the other reports")]
    ZeroFrequency { agent: usize, signal: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("not a permutation matrix")]
    NotPermutation,
}

pub type Result<T> = std::result::Result<T, Error>;

use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("not a permutation of 1..={k}: {values:?}")]
    InvalidPermutation { k: usize, values: Vec<usize> },

    #[error("dimension mismatch: expected {expected} items, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("item index {index} out of range 1..={k}")]
    IndexOutOfRange { index: usize, k: usize },

    #[error("invalid pairwise preference: winner and loser must differ")]
    DegeneratePair,

    #[error("weight vector must be strictly positive, got {value} at index {index}")]
    NonPositiveWeight { index: usize, value: f64 },

    #[error("invalid coarsening specification: {0}")]
    InvalidCoarsening(String),

    #[error("coarsening spec is not pairwise; pairwise observations required")]
    NotPairwise,

    #[error("exact enumeration limited to K <= {limit}, got K = {k}")]
    TooManyItems { k: usize, limit: usize },

    #[error("comparison graph is not connected in the two-way sense; BTL estimate does not exist")]
    DisconnectedComparisons,

    #[error("item {item} does not appear in any comparison")]
    IsolatedItem { item: usize },

    #[error("least squares edge set is empty")]
    EmptyEdgeSet,

    #[error("transition matrix is not row-stochastic (row {row} sums to {sum})")]
    NonStochastic { row: usize, sum: f64 },

    #[error("stationary distribution did not converge within {max_iter} iterations")]
    StationaryDiverged { max_iter: usize },

    #[error("probability cell ({i},{j}) is zero; method requires strictly positive entries")]
    ZeroProbabilityCell { i: usize, j: usize },

    #[error("linear system is singular")]
    SingularSystem,

    #[error("non-finite score at index {index}")]
    NonFiniteScore { index: usize },

    #[error("unknown aggregation method '{0}'")]
    UnknownMethod(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

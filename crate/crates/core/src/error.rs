use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("privacy parameter must be a finite positive number, got {0}")]
    InvalidEpsilon(f64),

    #[error("domain [0, {0}] is too small: at least two values are required")]
    DomainTooSmall(usize),

    #[error("alphabet size {0} is too small: k-RR needs k >= 2")]
    AlphabetTooSmall(usize),

    #[error("dimension mismatch: expected {expected} entries, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("value {value} is outside the domain [0, {n}]")]
    OutOfDomain { value: usize, n: usize },

    #[error("row {row} of the channel is not a probability vector (sum {sum})")]
    NotStochastic { row: usize, sum: f64 },

    #[error("entry ({row}, {col}) is negative or not finite: {value}")]
    InvalidEntry { row: usize, col: usize, value: f64 },

    #[error("power alpha^{exponent} drifted from exp(-eps*{exponent}) by {drift:e}")]
    PowerDrift { exponent: usize, drift: f64 },

    #[error("weights do not form a probability distribution: {0}")]
    InvalidDistribution(String),

    #[error("iteration needs a full-support starting point, entry {0} is zero")]
    NotFullSupport(usize),

    #[error("output {column} carries empirical mass but has zero predicted probability")]
    ZeroPredictedMass { column: usize },

    #[error("matrix is numerically singular (pivot {pivot:e} in column {column})")]
    Singular { column: usize, pivot: f64 },

    #[error("{0} must be at least 1")]
    ZeroCount(&'static str),

    #[error("radius and target log-ratio must be positive")]
    InvalidCalibration,

    #[error("binomial success probability must lie in (0, 1), got {0}")]
    InvalidSuccessProbability(f64),

    #[error("support size {k} is outside [2, {max}]")]
    InvalidSupportSize { k: usize, max: usize },

    #[error("the empirical distribution of an empty sample is undefined")]
    EmptySample,

    #[error("domain bound {n} exceeds the transport oracle limit {limit}")]
    OracleDomainTooLarge { n: usize, limit: usize },

    #[error("ground metric violates {0}")]
    InvalidMetric(String),
}

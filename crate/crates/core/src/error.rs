use thiserror::Error;

/// Errors raised by certified computations and the simulator.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// A comparison or equality could not be decided before hitting the precision cap.
    #[error("precision exhausted at {cap} bits while {context}")]
    PrecisionExhausted { cap: u32, context: String },

    /// A cyclic enumeration would exceed the configured period limit.
    #[error("period {period} exceeds the enumeration limit {limit}")]
    PeriodOverflow { period: u64, limit: u64 },

    /// The requested threshold is not certified strictly below the supremum.
    #[error("threshold {threshold} is not certified strictly below the supremum {sup}")]
    ThresholdAboveSup { threshold: String, sup: String },

    /// Omega thresholds must be certified strictly below 8/(3*sqrt 3).
    #[error("threshold {0} is not certified strictly below 8/(3*sqrt(3))")]
    ThresholdTooHigh(String),

    #[error("irrational angles are not supported by {0}")]
    IrrationalUnsupported(&'static str),

    #[error("invalid idempotent family: {0}")]
    InvalidIdempotents(String),

    #[error("matrix is not a cosine generator: {0}")]
    NotCosineGenerator(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

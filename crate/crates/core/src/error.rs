use thiserror::Error;

/// Errors shared across the library.
#[derive(Debug, Error, PartialEq)]
pub enum Error {
    #[error("horizon {0} exceeds the configured cap of {1}")]
    HorizonTooLarge(usize, usize),
    #[error("probability {0} at position {1} outside [{2}, {3}]")]
    ProbabilityOutOfRange(f64, usize, f64, f64),
    #[error("index {0} out of range for horizon {1}")]
    IndexOutOfRange(usize, usize),
    #[error("time index {0} outside [-1, {1}]")]
    TimeIndexOutOfRange(i32, usize),
    #[error("process entry {0} is not predictable")]
    NotPredictable(usize),
    #[error("process entry {0} is not adapted")]
    NotAdapted(usize),
    #[error("random variable bound to a different space")]
    SpaceMismatch,
    #[error("value table length {0} does not match space dimension {1}")]
    LengthMismatch(usize, usize),
    #[error("kernel order {0} does not match expected order {1}")]
    OrderMismatch(usize, usize),
    #[error("operation requires a constant success probability")]
    NonConstantP,
    #[error("input must be strictly positive (min value {0})")]
    NonPositiveInput(f64),
    #[error("semigroup time {0} must be non-negative")]
    NegativeTime(f64),
    #[error("martingale property violated at step {0} (residual {1})")]
    NotAMartingale(usize, f64),
    #[error("gradient norm is zero; the deviation bound is undefined for x > 0")]
    DegenerateGradient,
    #[error("arbitrage bounds violated at step {0}: need -1 < a < r < b")]
    ArbitrageViolation(usize),
    #[error("initial price must be strictly positive (got {0})")]
    InvalidPrice(f64),
    #[error("strike must be non-negative (got {0})")]
    InvalidStrike(f64),
    #[error("function value undefined at ({0}, {1})")]
    UndefinedFunctionValue(f64, i32),
}

pub type Result<T> = std::result::Result<T, Error>;

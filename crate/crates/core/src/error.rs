use thiserror::Error;

/// Errors raised anywhere in the library.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid prime {0}: an odd prime is required")]
    InvalidPrime(u64),
    #[error("division by an element that is zero at its precision")]
    DivisionByApparentZero,
    #[error("precision exhausted: {0}")]
    PrecisionExhausted(String),
    #[error("Hensel hypothesis failed: v(f(x0)) = {value_val}, v(f'(x0)) = {deriv_val}")]
    HenselHypothesisFailed { value_val: i64, deriv_val: i64 },
    #[error("level mismatch: {0}")]
    LevelMismatch(String),
    #[error("element does not lie in level {level} at precision")]
    CoercionFailure { level: u32 },
    #[error("series reduces to zero modulo the maximal ideal up to its truncation order")]
    ReducesToZero,
    #[error("denominator vanishes at the specialization point")]
    DenominatorVanishes,
    #[error("point lies outside the open disc (valuation {0})")]
    OutsideDisc(i64),
    #[error("level {level} too small: {reason}")]
    LevelTooSmall { level: u32, reason: String },
    #[error("the identity has no finite ramification index")]
    TrivialElement,
    #[error("norm compatibility fails between levels {lower} and {upper}")]
    CompatibilityFailure { lower: u32, upper: u32 },
    #[error("depth ranges do not fit: {0}")]
    RangeMismatch(String),
    #[error("Weierstrass degree {found} differs from the expected {expected}")]
    WeierstrassDegreeMismatch { expected: usize, found: usize },
    #[error("unit is a p-th power at working precision")]
    IsPthPower,
    #[error("conductor reduction stuck at index {0}")]
    ReductionStuck(i64),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

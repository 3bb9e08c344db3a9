use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("zero vector has no projective class")]
    ZeroVector,

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("negative input to square root")]
    NegativeInput,

    #[error("non-positive input to logarithm")]
    NonPositiveInput,

    #[error("invalid parameters: {0}")]
    InvalidParameters(String),

    #[error("precondition violated: {0}")]
    PreconditionViolated(String),

    #[error("search budget exhausted: {0}")]
    BudgetExhausted(String),

    #[error("degenerate line: every candidate direction was proportional to the anchor")]
    DegenerateLine,

    #[error("point lies in the radical of the bilinear form")]
    DegenerateDirection,

    #[error("point is not on the quadric")]
    NotOnQuadric,

    #[error("no isotropic point found up to height {height}")]
    HeightExhausted { height: u32 },

    #[error("invalid step count {0}: at least 2 points are required")]
    InvalidSteps(usize),

    #[error("trace too short: {len} points, need at least {min}")]
    TraceTooShort { len: usize, min: usize },

    #[error("index {index} out of range 2..={max}")]
    IndexOutOfRange { index: usize, max: usize },

    #[error("enumeration too large: {estimate} candidates exceeds limit {limit}")]
    TooLarge { estimate: u128, limit: u128 },

    #[error("no valid multiplier: {0}")]
    NoValidMultiplier(String),

    #[error("malformed trace: {0}")]
    MalformedTrace(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

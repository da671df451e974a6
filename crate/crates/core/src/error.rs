use thiserror::Error;

/// Errors raised by the library. The CLI maps each variant onto a stable exit code.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("empty input")]
    Empty,
    #[error("row {row} has feature names that differ from the first row")]
    InconsistentFeatures { row: usize },
    #[error("index {index} out of range for length {len}")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("unknown label `{0}`")]
    UnknownLabel(String),
    #[error("position {x_mm} mm lies outside the plate [0, {length_mm}] mm")]
    OutOfPlate { x_mm: f64, length_mm: f64 },
    #[error("invalid configuration: {0}")]
    ConfigInvalid(String),
    #[error("invalid trace: {0}")]
    InvalidTrace(String),
    #[error("trace too short: need {required} samples, have {actual}")]
    TooShort { required: usize, actual: usize },
    #[error("static phase spans only {span} samples")]
    StaticPhaseTooShort { span: usize },
    #[error("regression needs at least 2 points, got {0}")]
    TooFewPoints(usize),
    #[error("expected {expected} features, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("training data contains a single class")]
    SingleClass,
    #[error("non-finite value in input")]
    NonFinite,
    #[error("class `{label}` has {count} rows, fewer than k = {k}")]
    TooFewPerClass {
        label: String,
        count: usize,
        k: usize,
    },
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
}

pub type Result<T> = std::result::Result<T, Error>;

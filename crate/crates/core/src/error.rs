use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("degenerate density: all hypothesis weights are zero")]
    DegenerateDensity,

    #[error("degenerate conditional for coordinate {coordinate}: all entries are zero")]
    DegenerateConditional { coordinate: usize },

    #[error("innovation covariance is not positive definite")]
    NumericalFailure,

    #[error("measurement {index} of sensor {sensor} lies outside the surveillance region")]
    InvalidMeasurement { sensor: usize, index: usize },

    #[error("measurement index {index} out of range for sensor {sensor} ({count} measurements)")]
    IndexOutOfRange {
        sensor: usize,
        index: usize,
        count: usize,
    },

    #[error("label collision: {0}")]
    LabelCollision(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("conditional evaluation failed at state {state:?}, coordinate {coordinate}: {source}")]
    Evaluator {
        state: Vec<usize>,
        coordinate: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("{0}")]
    Config(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

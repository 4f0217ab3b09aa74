use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("inverted bucket range: {start} > {end}")]
    InvertedRange { start: i64, end: i64 },

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("degenerate labels: training data contains a single class")]
    DegenerateLabels,

    #[error("schema mismatch: {0}")]
    SchemaMismatch(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("model is not trained")]
    Untrained,
}

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("invalid tolerance: {0}")]
    Tolerance(String),
    #[error("malformed groupoid: {0}")]
    Groupoid(String),
    #[error("invalid measure: {0}")]
    Measure(String),
    /// A composition or lift between fibered spaces whose fiber conditions disagree.
    #[error("flavor mismatch: {0}")]
    Flavor(String),
    #[error("not a member: {0}")]
    Membership(String),
    #[error("hypothesis violated: {0}")]
    Hypothesis(String),
    #[error("parse error at line {line}, column {col}: {msg}")]
    Parse { line: usize, col: usize, msg: String },
}

pub type Result<T> = std::result::Result<T, Error>;

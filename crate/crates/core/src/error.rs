use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("capacity exceeded: {0}")]
    Capacity(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("empty grid")]
    EmptyGrid,
    #[error("unsupported shape: {0}")]
    UnsupportedShape(String),
    #[error("degenerate column {index} (norm {norm:e})")]
    DegenerateColumn { index: usize, norm: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("numerical breakdown at iteration {iteration}")]
    NumericalBreakdown { iteration: usize },
    #[error("linear program infeasible")]
    Infeasible,
    #[error("wrong basis family: {0}")]
    WrongBasis(String),
    #[error("missing index {0:?}")]
    MissingIndex(Vec<usize>),
    #[error("io: {0}")]
    Io(String),
    #[error("parse: {0}")]
    Parse(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("mode {mode} out of range for a tensor of order {order}")]
    ModeOutOfRange { mode: usize, order: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("index {index:?} out of range for dims {dims:?}")]
    IndexOutOfRange { index: Vec<usize>, dims: Vec<usize> },

    #[error("factor {mode} is not orthonormal (|U^T U - I| = {deviation:.3e})")]
    NotOrthonormal { mode: usize, deviation: f64 },

    #[error("rank deficient: {0}")]
    RankDeficient(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("singular spectral divisor at the zero mode (coefficient {coefficient:.3e})")]
    ZeroMode { coefficient: f64 },

    #[error("malformed tucker file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

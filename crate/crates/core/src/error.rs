use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("geometry: {0}")]
    Geometry(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("non-finite sample at index {index}")]
    NonFinite { index: usize },

    #[error("propagation planes coincide (z2 == z0 == {0})")]
    CoincidentPlanes(f64),

    #[error("basis state {index} has zero norm")]
    ZeroNorm { index: usize },

    #[error("distributions live on different grids")]
    GridMismatch,

    #[error("distribution has no positive {0}")]
    Degenerate(&'static str),

    #[error("distribution is not unimodal at half maximum: {0}")]
    NotUnimodal(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("geometry file: {0}")]
    Parse(String),

    #[error("io: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

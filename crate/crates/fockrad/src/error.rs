use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("malformed JSON: {0}")]
    Json(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("non-finite entry: {0}")]
    NonFinite(String),
    #[error("{what} of size {size} exceeds the cap {cap}")]
    TooLarge { what: &'static str, size: usize, cap: usize },
    #[error("matrix is not Hermitian (defect {defect:e})")]
    NotHermitian { defect: f64 },
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("not a row contraction: I - r^2 sum T_i T_i^* has eigenvalue {margin:e}")]
    NotRowContraction { margin: f64 },
    #[error("multi-Toeplitz operator is not positive (min eigenvalue {margin:e})")]
    NotPositive { margin: f64 },
    #[error("factorization is numerically degenerate (residual {residual:e})")]
    Degenerate { residual: f64 },
    #[error("unknown suite `{0}`")]
    UnknownSuite(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Stable numeric code per error kind, reported by the command line tool.
    pub fn code(&self) -> u32 {
        match self {
            Error::InvalidInput(_) => 10,
            Error::Parse(_) => 11,
            Error::Json(_) => 12,
            Error::Shape(_) => 13,
            Error::NonFinite(_) => 14,
            Error::TooLarge { .. } => 15,
            Error::NotHermitian { .. } => 16,
            Error::NotSquare { .. } => 17,
            Error::NotRowContraction { .. } => 18,
            Error::NotPositive { .. } => 19,
            Error::Degenerate { .. } => 20,
            Error::UnknownSuite(_) => 21,
            Error::Io(_) => 22,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

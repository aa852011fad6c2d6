use thiserror::Error;

/// Errors raised by the numerical routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix must be non-empty")]
    Empty,
    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },
    #[error("matrix is singular at pivot {pivot}")]
    Singular { pivot: usize },
    #[error("matrix is not diagonalizable (cond(P) = {cond:e}, eigenvector residual = {residual:e})")]
    NonDiagonalizable { cond: f64, residual: f64 },
    #[error("QR iteration failed to converge after {iterations} iterations")]
    NoConvergence { iterations: usize },
    #[error("time {t} outside [{t_a}, {t_b}]")]
    TimeOutOfRange { t: f64, t_a: f64, t_b: f64 },
    #[error("dominant subset is empty")]
    EmptySubset,
    #[error("transition amplitude {modulus:e} is below the vanishing threshold {threshold:e}")]
    VanishingDenominator { modulus: f64, threshold: f64 },
    #[error("trace {modulus:e} is below the vanishing threshold {threshold:e}")]
    VanishingTrace { modulus: f64, threshold: f64 },
    #[error("rational approximation failed: {0}")]
    ApproximationFailure(String),
    #[error("no aligned period within enumeration bounds: {0}")]
    EmptyWithinBounds(String),
    #[error("maximal imaginary part B = {b_max} is positive; |Tr exp(-iHt/hbar)| diverges")]
    PositiveBmax { b_max: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    /// Stable identifier used in machine-readable reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::DimensionMismatch { .. } => "DimensionMismatch",
            Error::NotSquare { .. } => "NotSquare",
            Error::Empty => "Empty",
            Error::NonFinite { .. } => "NonFinite",
            Error::Singular { .. } => "Singular",
            Error::NonDiagonalizable { .. } => "NonDiagonalizable",
            Error::NoConvergence { .. } => "NoConvergence",
            Error::TimeOutOfRange { .. } => "TimeOutOfRange",
            Error::EmptySubset => "EmptySubset",
            Error::VanishingDenominator { .. } => "VanishingDenominator",
            Error::VanishingTrace { .. } => "VanishingTrace",
            Error::ApproximationFailure(_) => "ApproximationFailure",
            Error::EmptyWithinBounds(_) => "EmptyWithinBounds",
            Error::PositiveBmax { .. } => "PositiveBmax",
            Error::InvalidArgument(_) => "InvalidArgument",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

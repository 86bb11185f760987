use thiserror::Error;

/// Errors raised by the matrix, Smith-form and sequence machinery.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("compound order {order} out of range 1..={max}")]
    OrderOutOfRange { order: usize, max: usize },

    #[error("{0} is not prime")]
    NotPrime(u64),

    #[error("matrix is nilpotent")]
    Nilpotent,

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("corrupted determinantal divisors: {0}")]
    CorruptDivisors(String),

    #[error("localized Smith forms do not match: {0}")]
    MismatchedParts(String),

    #[error("division by zero at n = {0}")]
    DivisionByZero(u64),

    #[error("infinite value in {op} at n = {index}")]
    InfiniteOperand { op: &'static str, index: u64 },

    #[error("empty sequence")]
    EmptySequence,

    #[error("insufficient samples: {0}")]
    InsufficientSamples(String),

    #[error("polynomial is not monic")]
    NotMonic,

    #[error("zero polynomial")]
    ZeroPolynomial,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;

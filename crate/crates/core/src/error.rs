use thiserror::Error;

/// Errors raised by the exact-arithmetic and search layers.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("modulus {0:?} is reducible over GF({1})")]
    ReducibleModulus(Vec<u32>, u32),
    #[error("unsupported extension degree {0} (at most 4)")]
    UnsupportedDegree(u32),
    #[error("unsupported field: {0}")]
    UnsupportedField(String),
    #[error("division by zero")]
    DivisionByZero,
    #[error("operands live over different fields")]
    FieldMismatch,
    #[error("dimension mismatch: {0}")]
    DimMismatch(String),
    #[error("matrix size {0} exceeds the library cap of {1}")]
    TooLarge(usize, usize),
    #[error("cap exceeded: {0}")]
    CapExceeded(String),
    #[error("bad witness: {0}")]
    BadWitness(String),
    #[error("scalar matrices are not vertices of the commuting graph")]
    ScalarVertex,
    #[error("operation requires a finite field")]
    InfiniteField,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;

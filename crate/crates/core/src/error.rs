use thiserror::Error;

/// Errors shared by the fixed-point datapath and the bandwidth pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A value cannot be represented in Q32.32.
    #[error("value {0} is outside the representable Q32.32 range")]
    Range(f64),
    /// A checked fixed-point operation overflowed.
    #[error("fixed-point overflow in {0}")]
    Overflow(&'static str),
    #[error("division by zero")]
    DivByZero,
    /// An argument is outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(&'static str),
    /// The Remez exchange failed to equioscillate.
    #[error("Remez exchange did not converge within {0} iterations")]
    Convergence(usize),
    /// All sample points are equal (zero variance).
    #[error("degenerate data: sample variance is not positive")]
    DegenerateData,
    /// Fewer than two sample points.
    #[error("dataset must contain at least two values")]
    EmptyInput,
    /// A sample value is non-finite or unencodable.
    #[error("invalid dataset value {value} at index {index}")]
    InvalidValue { index: usize, value: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

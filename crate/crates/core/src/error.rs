use core::fmt;

use alloc::string::String;

/// Crate-wide error type.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Operand dimensions are incompatible.
    DimensionMismatch { expected: usize, got: usize, context: &'static str },
    /// A matrix required to be Hermitian is not, to the stated tolerance.
    NotHermitian { deviation: f64 },
    /// A matrix required to be positive semidefinite has a negative
    /// eigenvalue below tolerance.
    NotPositive { min_eigenvalue: f64 },
    /// A density matrix trace differs from one beyond tolerance.
    BadTrace { trace: f64 },
    /// A state vector could not be normalized (zero norm).
    ZeroNorm,
    /// Configuration or program input is invalid.
    Invalid(String),
    /// A numerical step produced NaN or overflowed.
    Numerical(&'static str),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::DimensionMismatch { expected, got, context } => {
                write!(f, "dimension mismatch in {context}: expected {expected}, got {got}")
            }
            Error::NotHermitian { deviation } => {
                write!(f, "matrix is not Hermitian (max deviation {deviation:e})")
            }
            Error::NotPositive { min_eigenvalue } => {
                write!(f, "matrix is not positive semidefinite (min eigenvalue {min_eigenvalue:e})")
            }
            Error::BadTrace { trace } => write!(f, "density matrix trace is {trace}, expected 1"),
            Error::ZeroNorm => write!(f, "state vector has zero norm"),
            Error::Invalid(msg) => write!(f, "invalid input: {msg}"),
            Error::Numerical(msg) => write!(f, "numerical failure: {msg}"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;

//! Error type shared by all core modules.

use core::fmt;

/// Convenience alias used throughout the crate.
pub type Result<T> = core::result::Result<T, Error>;

/// Failure conditions surfaced by the core library.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Error {
    /// A model, state, or control input failed a finiteness or shape check.
    ModelInput(&'static str),
    /// The innovation variance was not positive, so no gain can be formed.
    SingularInnovation { s: f64 },
    /// A measurement was not finite.
    Measurement { value: f64 },
    /// A configuration or function parameter was out of range.
    Parameter(&'static str),
    /// An argument left the mathematical domain of the operation.
    Domain(&'static str),
    /// A row or channel count did not match what the operation expected.
    Shape { expected: usize, got: usize },
    /// Too few rows or samples for the requested statistic.
    InsufficientData { needed: usize, got: usize },
    /// An iteration failed to converge within its step limit.
    Divergence { iterations: usize },
    /// A value could not be quantized into a motor command.
    Command { value: f64 },
    /// A trace row's timestamp did not increase past its predecessor.
    NonMonotonicTime { index: usize },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::ModelInput(what) => write!(f, "invalid model input: {what}"),
            Error::SingularInnovation { s } => {
                write!(f, "innovation variance {s} is not positive")
            }
            Error::Measurement { value } => write!(f, "measurement {value} is not finite"),
            Error::Parameter(what) => write!(f, "invalid parameter: {what}"),
            Error::Domain(what) => write!(f, "domain error: {what}"),
            Error::Shape { expected, got } => {
                write!(f, "shape mismatch: expected {expected}, got {got}")
            }
            Error::InsufficientData { needed, got } => {
                write!(f, "insufficient data: need at least {needed}, got {got}")
            }
            Error::Divergence { iterations } => {
                write!(f, "no convergence after {iterations} iterations")
            }
            Error::Command { value } => {
                write!(f, "cannot quantize non-finite value {value}")
            }
            Error::NonMonotonicTime { index } => {
                write!(f, "timestamp at row {index} does not increase")
            }
        }
    }
}

impl core::error::Error for Error {}

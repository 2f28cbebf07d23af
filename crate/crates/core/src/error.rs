//! Error type shared by every module of the crate.

use thiserror::Error;

/// Errors raised by model construction and by the numerical routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Malformed or inconsistent input data.
    #[error("invalid input: {0}")]
    Input(String),

    /// Two objects that must have matching dimensions do not.
    #[error("dimension mismatch in {context}: expected {expected}, got {got}")]
    Dimension {
        context: String,
        expected: usize,
        got: usize,
    },

    /// Input contained NaN or an infinity.
    #[error("non-finite value in {0}")]
    NonFinite(String),

    /// Numerical rank could not be decided: singular values straddle the cutoff.
    #[error("ambiguous numerical rank in {context}: cutoff {cutoff:.3e}, neighbouring singular values {above:.3e} / {below:.3e}")]
    DegenerateRank {
        context: String,
        cutoff: f64,
        above: f64,
        below: f64,
    },

    /// A structural identity failed beyond its tolerance.
    #[error("{name} violated: residual {residual:.3e} exceeds {tolerance:.1e}")]
    Invariant {
        name: String,
        residual: f64,
        tolerance: f64,
    },
}

impl Error {
    pub fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub fn dim(context: impl Into<String>, expected: usize, got: usize) -> Self {
        Error::Dimension {
            context: context.into(),
            expected,
            got,
        }
    }

    pub fn invariant(name: impl Into<String>, residual: f64, tolerance: f64) -> Self {
        Error::Invariant {
            name: name.into(),
            residual,
            tolerance,
        }
    }

    /// True for errors that stem from the data handed in rather than from numerics.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::Input(_) | Error::Dimension { .. } | Error::NonFinite(_) | Error::Invariant { .. }
        )
    }

    pub fn is_degenerate(&self) -> bool {
        matches!(self, Error::DegenerateRank { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;

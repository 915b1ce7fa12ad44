use thiserror::Error;

use crate::substances::SubstanceKind;

pub type Result<T> = std::result::Result<T, Error>;

/// Failure categories, used by front ends to pick an exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    /// Bad or inconsistent input parameters.
    Invalid,
    /// A numerical kernel did not converge or produced non-finite values.
    Numeric,
    /// The requested thermodynamic state does not exist.
    Domain,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("parameter `{name}` must be {requirement}, got {value}")]
    InvalidParameter {
        name: &'static str,
        requirement: &'static str,
        value: f64,
    },

    #[error("level index {index} is not valid for {kind:?}")]
    InvalidLevel { kind: SubstanceKind, index: usize },

    #[error("{operation} is not available for {kind:?}")]
    UnsupportedKind {
        operation: &'static str,
        kind: SubstanceKind,
    },

    #[error("ordering violated: {0}")]
    Ordering(String),

    #[error("level cap of {cap} reached before the tail bound met tolerance (bound {bound:e})")]
    LevelCapExceeded { cap: usize, bound: f64 },

    #[error("no sign change on [{lo}, {hi}]: f(lo) = {f_lo}, f(hi) = {f_hi}")]
    NoSignChange {
        lo: f64,
        hi: f64,
        f_lo: f64,
        f_hi: f64,
    },

    #[error("root search did not converge within {iterations} iterations")]
    RootIterations { iterations: usize },

    #[error("adaptive quadrature exceeded depth {depth} near [{a}, {b}]")]
    QuadratureDepth { depth: usize, a: f64, b: f64 },

    #[error("non-finite value {value} encountered at {at}")]
    NonFinite { at: f64, value: f64 },

    #[error("finite-difference step underflow at {at}")]
    StepUnderflow { at: f64 },

    #[error("no equilibrium state: {0}")]
    Domain(String),
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::InvalidParameter { .. }
            | Error::InvalidLevel { .. }
            | Error::UnsupportedKind { .. }
            | Error::Ordering(_) => ErrorClass::Invalid,
            Error::LevelCapExceeded { .. }
            | Error::NoSignChange { .. }
            | Error::RootIterations { .. }
            | Error::QuadratureDepth { .. }
            | Error::NonFinite { .. }
            | Error::StepUnderflow { .. } => ErrorClass::Numeric,
            Error::Domain(_) => ErrorClass::Domain,
        }
    }
}

pub(crate) fn require_positive(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(Error::InvalidParameter {
            name,
            requirement: "finite and strictly positive",
            value,
        })
    }
}

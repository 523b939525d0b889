use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("division by zero")]
    DivisionByZero,
    #[error("value with log-magnitude {log_mag} is outside the range of f64")]
    OutOfRange { log_mag: f64 },
    #[error("non-finite integrand sample at u = {at}")]
    NonFinite { at: f64 },
    #[error("{what} = {value} is outside the supported domain")]
    Domain { what: &'static str, value: f64 },
    #[error("imaginary residue {residue:e} exceeds tolerance {tolerance:e}")]
    ImaginaryResidue { residue: f64, tolerance: f64 },
    #[error("condition number {condition:e} exceeds {limit:e}; value refused")]
    IllConditioned { condition: f64, limit: f64 },
    #[error("variance term is not positive ({0:e})")]
    DegenerateVariance(f64),
    #[error("arguments {mu} and {nu} are too close for step {h}")]
    StencilTooNarrow { mu: f64, nu: f64, h: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    /// Failures of a numerical consistency check, as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NonFinite { .. }
                | Error::ImaginaryResidue { .. }
                | Error::IllConditioned { .. }
                | Error::DegenerateVariance(_)
                | Error::OutOfRange { .. }
                | Error::DivisionByZero
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;

use thiserror::Error;

/// Why a coordinate chart could not be applied.
#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum ChartDomainError {
    /// The Toda chart needs a strictly positive attraction constant.
    #[error("Toda chart is singular for a = {a} (requires a > 0)")]
    ANonpositive { a: f64 },
    /// The logarithm in the inverse chart received a non-positive argument.
    #[error("inverse Toda chart leaves its domain: log argument {arg} is not positive")]
    VOutOfRange { arg: f64 },
    #[error("volume {v} does not exceed the excluded volume b = {b}")]
    VolumeLeqB { v: f64, b: f64 },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{field}` = {value}: {reason}")]
    InvalidParameter {
        field: &'static str,
        value: f64,
        reason: &'static str,
    },
    #[error("{what} = {value} is outside the domain ({requirement})")]
    Domain {
        what: &'static str,
        value: f64,
        requirement: &'static str,
    },
    #[error("exponent {exponent} exceeds the representable range (|exponent| <= {limit})")]
    Range { exponent: f64, limit: f64 },
    #[error(transparent)]
    Chart(#[from] ChartDomainError),
    #[error("{what} evaluated to a non-finite value")]
    NonFinite { what: &'static str },
    #[error("degenerate least-squares fit: {0}")]
    DegenerateFit(&'static str),
}

pub type Result<T> = std::result::Result<T, Error>;
